use crate::{Error, Result};

fn check_finite(points: &[(f64, f64)]) -> Result<()> {
    if points.is_empty() {
        return Err(Error::NoPoints);
    }
    for (i, (x, y)) in points.iter().enumerate() {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::NonFinite { index: i });
        }
    }
    Ok(())
}

/// Minimize-both Pareto membership flags.
///
/// A point is a member iff no other point is at-or-below it on both axes
/// with a different coordinate pair; exact duplicates are all kept.
pub fn pareto_front(points: &[(f64, f64)]) -> Result<Vec<bool>> {
    check_finite(points)?;
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].partial_cmp(&points[b]).expect("finite"));

    let mut member = vec![false; points.len()];
    let mut best_y = f64::INFINITY;
    let mut i = 0;
    while i < order.len() {
        // One group per x value; within it only min-y points can survive.
        let x = points[order[i]].0;
        let mut j = i;
        while j < order.len() && points[order[j]].0 == x {
            j += 1;
        }
        let group_min_y = points[order[i]].1;
        if group_min_y < best_y {
            for &idx in &order[i..j] {
                member[idx] = points[idx].1 == group_min_y;
            }
            best_y = group_min_y;
        }
        i = j;
    }
    Ok(member)
}

/// Index of the knee member of a Pareto front.
///
/// Axes are min-max normalized over the front; the knee maximizes
/// perpendicular distance to the chord joining the extreme members. Ties go
/// to the lower x (latency).
pub fn knee(front: &[(f64, f64)]) -> Result<usize> {
    check_finite(front)?;
    if front.len() == 1 {
        return Ok(0);
    }
    let min = |f: fn(&(f64, f64)) -> f64| front.iter().map(f).fold(f64::INFINITY, f64::min);
    let max = |f: fn(&(f64, f64)) -> f64| front.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
    let (x0, x1) = (min(|p| p.0), max(|p| p.0));
    let (y0, y1) = (min(|p| p.1), max(|p| p.1));
    let norm = |v: f64, lo: f64, hi: f64| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
    let pts: Vec<(f64, f64)> =
        front.iter().map(|&(x, y)| (norm(x, x0, x1), norm(y, y0, y1))).collect();

    let a = *pts.iter().min_by(|p, q| p.partial_cmp(q).expect("finite")).expect("non-empty");
    let b = *pts.iter().max_by(|p, q| p.partial_cmp(q).expect("finite")).expect("non-empty");
    let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();

    let mut best = 0;
    let mut best_d = f64::NEG_INFINITY;
    for (i, &(x, y)) in pts.iter().enumerate() {
        let d = if len > 0.0 {
            ((b.0 - a.0) * (a.1 - y) - (a.0 - x) * (b.1 - a.1)).abs() / len
        } else {
            0.0
        };
        let better = d > best_d
            || (d == best_d && front[i].0 < front[best].0)
            || (d == best_d && front[i].0 == front[best].0 && front[i].1 < front[best].1);
        if better {
            best = i;
            best_d = d;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lone_point_is_both_member_and_knee() {
        assert_eq!(pareto_front(&[(3.0, 4.0)]).unwrap(), vec![true]);
        assert_eq!(knee(&[(3.0, 4.0)]).unwrap(), 0);
    }

    #[test]
    fn dominated_point_is_flagged_out() {
        let pts = [(10.0, 1.0), (5.0, 2.0), (7.0, 3.0)];
        assert_eq!(pareto_front(&pts).unwrap(), vec![true, true, false]);
    }

    #[test]
    fn exact_duplicates_are_all_kept() {
        let pts = [(1.0, 2.0), (1.0, 2.0), (0.5, 3.0)];
        assert_eq!(pareto_front(&pts).unwrap(), vec![true, true, true]);
    }

    #[test]
    fn same_x_different_y_is_dominated() {
        let pts = [(1.0, 2.0), (1.0, 3.0)];
        assert_eq!(pareto_front(&pts).unwrap(), vec![true, false]);
    }

    #[test]
    fn empty_and_non_finite_inputs_are_rejected() {
        assert!(matches!(pareto_front(&[]), Err(Error::NoPoints)));
        assert!(matches!(
            pareto_front(&[(0.0, f64::NAN)]),
            Err(Error::NonFinite { index: 0 })
        ));
        assert!(matches!(
            knee(&[(0.0, 0.0), (f64::INFINITY, 1.0)]),
            Err(Error::NonFinite { index: 1 })
        ));
    }

    #[test]
    fn hand_computed_knee_of_a_three_point_front() {
        let front = [(0.0, 1.0), (0.1, 0.1), (1.0, 0.0)];
        assert_eq!(knee(&front).unwrap(), 1);
        // Chord x + y = 1, distance |0.1 + 0.1 - 1| / sqrt(2).
        let d = 0.8 / 2.0f64.sqrt();
        assert!((d - 0.5657).abs() < 1e-4);
    }

    #[test]
    fn knee_tie_breaks_toward_lower_x() {
        // Symmetric front: both middle points sit at exactly the same
        // distance (coordinates chosen to be exact in binary).
        let front = [(0.0, 1.0), (0.25, 0.5), (0.5, 0.25), (1.0, 0.0)];
        let k = knee(&front).unwrap();
        assert_eq!(k, 1, "picked {:?}", front[k]);
    }

    #[test]
    fn knee_is_invariant_under_positive_affine_rescaling() {
        let front = [(2.0, 9.0), (3.0, 4.0), (7.0, 1.0)];
        let scaled: Vec<(f64, f64)> =
            front.iter().map(|&(x, y)| (100.0 * x + 7.0, 0.01 * y - 0.003)).collect();
        assert_eq!(knee(&front).unwrap(), knee(&scaled).unwrap());
    }
}
