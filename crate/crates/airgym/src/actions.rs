use serde::{Deserialize, Serialize};

/// Duration of one actuation, in seconds.
pub const T_MAX: f64 = 1.0;

/// One discrete actuation: command a straight-line velocity or rotate in
/// place.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    /// Commanded speed in m/s along the current heading for `T_MAX`.
    /// Negative values move backwards.
    SetVelocity(f64),
    /// Heading change in degrees, applied instantly; the vehicle holds
    /// position for the step. Positive turns right (clockwise).
    YawDegrees(f64),
}

/// The fixed discrete action set, indexed by the policy head.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionTable {
    actions: Vec<Action>,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

impl ActionTable {
    /// 25 actions: 10 forward speeds on [1, 5] m/s, 5 backward speeds, 5
    /// right yaws on a halving ladder from 108 deg, 5 left yaws from -216 deg.
    pub fn standard() -> Self {
        let mut actions = Vec::with_capacity(25);
        for v in linspace(1.0, 5.0, 10) {
            actions.push(Action::SetVelocity(v));
        }
        for v in linspace(1.0, 5.0, 5) {
            actions.push(Action::SetVelocity(-v));
        }
        for i in 0..5 {
            actions.push(Action::YawDegrees(108.0 / f64::powi(2.0, i)));
        }
        for i in 0..5 {
            actions.push(Action::YawDegrees(-216.0 / f64::powi(2.0, i)));
        }
        Self { actions }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<Action> {
        self.actions.get(index).copied()
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_has_25_entries_in_group_order() {
        let t = ActionTable::standard();
        assert_eq!(t.len(), 25);
        assert_eq!(t.get(0), Some(Action::SetVelocity(1.0)));
        assert_eq!(t.get(9), Some(Action::SetVelocity(5.0)));
        assert_eq!(t.get(10), Some(Action::SetVelocity(-1.0)));
        assert_eq!(t.get(14), Some(Action::SetVelocity(-5.0)));
        assert_eq!(t.get(15), Some(Action::YawDegrees(108.0)));
        assert_eq!(t.get(19), Some(Action::YawDegrees(6.75)));
        assert_eq!(t.get(20), Some(Action::YawDegrees(-216.0)));
        assert_eq!(t.get(24), Some(Action::YawDegrees(-13.5)));
        assert_eq!(t.get(25), None);
    }

    #[test]
    fn forward_speeds_are_evenly_spaced() {
        let t = ActionTable::standard();
        let speeds: Vec<f64> = (0..10)
            .map(|i| match t.get(i).unwrap() {
                Action::SetVelocity(v) => v,
                _ => panic!("expected velocity"),
            })
            .collect();
        for w in speeds.windows(2) {
            assert!((w[1] - w[0] - 4.0 / 9.0).abs() < 1e-12);
        }
    }

    #[test]
    fn yaw_ladders_halve() {
        let t = ActionTable::standard();
        for i in 15..19 {
            let (a, b) = match (t.get(i).unwrap(), t.get(i + 1).unwrap()) {
                (Action::YawDegrees(a), Action::YawDegrees(b)) => (a, b),
                _ => panic!("expected yaw"),
            };
            assert_eq!(a / 2.0, b);
        }
        for i in 20..24 {
            let (a, b) = match (t.get(i).unwrap(), t.get(i + 1).unwrap()) {
                (Action::YawDegrees(a), Action::YawDegrees(b)) => (a, b),
                _ => panic!("expected yaw"),
            };
            assert_eq!(a / 2.0, b);
        }
    }
}
