//! Host-side driving of the accelerator through its command channel,
//! including weight-buffer residency rejections for the published network.

use flexsim::{check_residency, configure, cycles, Accelerator, AcceleratorConfig, Command, Error, Response};
use quantnet::{quantize_network, random_weights, Activation, NetworkSpec, RequantParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_inputs(n: usize, dim: usize, seed: u64) -> Vec<Vec<f32>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect()).collect()
}

#[test]
fn full_command_sequence_drives_one_inference() {
    let spec = NetworkSpec::mlp(&[16, 24, 6]).unwrap();
    let w = random_weights(&spec, 5, 0.5);
    let inputs = random_inputs(4, 16, 19);
    let q = quantize_network(&spec, &w, &inputs, 8).unwrap();
    let config = AcceleratorConfig::grid_point(4, 8, 8, 64).unwrap();
    let mut acc = Accelerator::new(config).unwrap();

    for (i, l) in q.layers.iter().enumerate() {
        let r = acc
            .execute(Command::ConfigLayer {
                layer: i,
                in_dim: l.in_dim,
                out_dim: l.out_dim,
                activation: l.activation,
                requant: l.requant,
                output_scale: l.output_scale,
            })
            .unwrap();
        assert!(matches!(r, Response::Ack));
        let r = acc
            .execute(Command::LoadWeights {
                layer: i,
                weights: l.weights.values.clone(),
                bias: l.bias_q.clone(),
            })
            .unwrap();
        assert!(matches!(r, Response::Ack));
    }

    let codes = q.quantize_input(&inputs[0]).unwrap();
    let dims: Vec<(usize, usize)> = spec.layers.iter().map(|l| (l.in_dim, l.out_dim)).collect();
    match acc.execute(Command::Run { input: codes.clone() }).unwrap() {
        Response::Done { cycles: got } => {
            assert_eq!(got, cycles::network_cycles(&config, &dims));
        }
        other => panic!("expected Done, got {other:?}"),
    }
    assert!(acc.irq_raised());

    match acc.execute(Command::ReadResult).unwrap() {
        Response::Result(tensor) => {
            assert_eq!(tensor.values, q.forward_codes(&codes).unwrap());
            assert_eq!(tensor.scale, q.output_scale());
            assert_eq!(tensor.bits, 8);
        }
        other => panic!("expected Result, got {other:?}"),
    }
}

fn config_dims(acc: &mut Accelerator, dims: &[(usize, usize)]) -> Result<(), Error> {
    let requant = RequantParams { multiplier: 1 << 30, shift: 30 };
    for (i, &(in_dim, out_dim)) in dims.iter().enumerate() {
        acc.execute(Command::ConfigLayer {
            layer: i,
            in_dim,
            out_dim,
            activation: Activation::Relu,
            requant,
            output_scale: 1.0,
        })?;
    }
    Ok(())
}

#[test]
fn published_network_overflows_low_pe_counts_at_8_bit() {
    let dims = [(160, 4096), (4096, 2048), (2048, 512), (512, 25)];
    for pes in [2u32, 4, 8] {
        let config = AcceleratorConfig::grid_point(pes, 16, 8, 1024).unwrap();
        let mut acc = Accelerator::new(config).unwrap();
        match config_dims(&mut acc, &dims) {
            Err(Error::CapacityExceeded { layer, pe, needed, budget }) => {
                assert_eq!(layer, 1, "{pes} PEs");
                assert_eq!(pe, 0);
                assert!(needed > budget);
            }
            other => panic!("{pes} PEs should overflow, got {other:?}"),
        }
    }
    // Sixteen PEs split the largest layer finely enough to fit.
    let config = AcceleratorConfig::grid_point(16, 16, 8, 1024).unwrap();
    let mut acc = Accelerator::new(config).unwrap();
    config_dims(&mut acc, &dims).unwrap();
}

#[test]
fn standalone_residency_check_agrees_with_incremental_configuration() {
    let dims = [(160, 4096), (4096, 2048), (2048, 512), (512, 25)];
    for pes in [2u32, 4, 8, 16, 32] {
        for &bits in &[4u8, 8] {
            let config = AcceleratorConfig::grid_point(pes, 16, bits, 1024).unwrap();
            let standalone = check_residency(&config, &dims);
            let mut acc = Accelerator::new(config).unwrap();
            let incremental = config_dims(&mut acc, &dims);
            match (standalone, incremental) {
                (Ok(()), Ok(())) => {}
                (
                    Err(Error::CapacityExceeded { layer: l1, pe: p1, .. }),
                    Err(Error::CapacityExceeded { layer: l2, pe: p2, .. }),
                ) => {
                    assert_eq!((l1, p1), (l2, p2), "{pes} PEs {bits}-bit");
                }
                other => panic!("verdicts disagree for {pes} PEs {bits}-bit: {other:?}"),
            }
        }
    }
}

#[test]
fn four_bit_packing_admits_8_pes_but_not_4() {
    let dims = [(160, 4096), (4096, 2048), (2048, 512), (512, 25)];
    let config = AcceleratorConfig::grid_point(4, 16, 4, 1024).unwrap();
    let mut acc = Accelerator::new(config).unwrap();
    assert!(matches!(config_dims(&mut acc, &dims), Err(Error::CapacityExceeded { .. })));

    let config = AcceleratorConfig::grid_point(8, 16, 4, 1024).unwrap();
    let mut acc = Accelerator::new(config).unwrap();
    config_dims(&mut acc, &dims).unwrap();
}

#[test]
fn weight_payloads_must_match_configured_geometry() {
    let config = AcceleratorConfig::grid_point(4, 8, 8, 64).unwrap();
    let mut acc = Accelerator::new(config).unwrap();
    config_dims(&mut acc, &[(8, 4)]).unwrap();

    let r = acc.execute(Command::LoadWeights { layer: 0, weights: vec![0; 31], bias: vec![0; 4] });
    assert!(matches!(r, Err(Error::Shape { .. })));
    let r = acc.execute(Command::LoadWeights { layer: 0, weights: vec![0; 32], bias: vec![0; 3] });
    assert!(matches!(r, Err(Error::Shape { .. })));
    let r = acc.execute(Command::LoadWeights { layer: 1, weights: vec![0; 32], bias: vec![0; 4] });
    assert!(matches!(r, Err(Error::Protocol(_))));
}

#[test]
fn four_bit_rejects_codes_outside_the_narrow_range() {
    let config = AcceleratorConfig::grid_point(4, 8, 4, 64).unwrap();
    let mut acc = Accelerator::new(config).unwrap();
    config_dims(&mut acc, &[(8, 4)]).unwrap();

    let mut weights = vec![0i8; 32];
    weights[0] = 9;
    let r = acc.execute(Command::LoadWeights { layer: 0, weights, bias: vec![0; 4] });
    assert!(matches!(r, Err(Error::Protocol(_))));
}

#[test]
fn run_requires_weights_and_matching_input_length() {
    let config = AcceleratorConfig::grid_point(4, 8, 8, 64).unwrap();
    let mut acc = Accelerator::new(config).unwrap();
    assert!(matches!(acc.execute(Command::Run { input: vec![0; 8] }), Err(Error::Protocol(_))));

    config_dims(&mut acc, &[(8, 4)]).unwrap();
    assert!(matches!(acc.execute(Command::Run { input: vec![0; 8] }), Err(Error::Protocol(_))));

    acc.execute(Command::LoadWeights { layer: 0, weights: vec![1; 32], bias: vec![0; 4] }).unwrap();
    assert!(matches!(
        acc.execute(Command::Run { input: vec![0; 5] }),
        Err(Error::Shape { .. })
    ));
    assert!(acc.execute(Command::Run { input: vec![1; 8] }).is_ok());
}

#[test]
fn network_precision_must_match_the_array() {
    let spec = NetworkSpec::mlp(&[8, 6, 3]).unwrap();
    let w = random_weights(&spec, 2, 0.5);
    let inputs = random_inputs(3, 8, 4);
    let q = quantize_network(&spec, &w, &inputs, 8).unwrap();
    let config = AcceleratorConfig::grid_point(4, 8, 4, 64).unwrap();
    assert!(matches!(configure(config, &q), Err(Error::PrecisionMismatch { .. })));
}

#[test]
fn layer_chaining_is_checked_at_config_time() {
    let config = AcceleratorConfig::grid_point(4, 8, 8, 64).unwrap();
    let mut acc = Accelerator::new(config).unwrap();
    assert!(matches!(config_dims(&mut acc, &[(8, 4), (5, 2)]), Err(Error::Shape { .. })));
}
