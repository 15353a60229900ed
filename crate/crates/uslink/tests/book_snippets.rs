//! The runnable snippets from the guide in `book/src/`, one test per
//! chapter, kept verbatim so the book cannot drift from the library.

use uslink::prelude::*;

#[test]
fn introduction_quick_start() {
    let params = LinkParams::from_snr_db(2, 9.0).with_rho(0.5);

    let cfg = SimConfig::new(params, ChannelModel::Gaussian, ReceiverKind::Sdjd)
        .with_symbols(100_000)
        .with_seed(7);
    let sim = simulate_ber(&cfg).unwrap();

    let query =
        ConditionedBerQuery::new(ReceiverKind::Sdjd, params.nominal_snr(), 0.5, params.c_dim);
    let theory = ber_2ppm_closed(&query).unwrap();

    assert!(sim.ci95_low <= theory && theory <= sim.ci95_high);
}

#[test]
fn signal_model_modulation() {
    use uslink::modem::modulate;

    let frame = modulate(&[1, 0], 4).unwrap();
    assert_eq!(frame.indices, vec![2]);
}

#[test]
fn signal_model_validation_warning() {
    let p = LinkParams::from_snr_db(2, 9.0).with_c_dim(10.0);
    let report = validate_params(&p);
    assert!(report.is_valid() && report.has_warnings());
}

#[test]
fn signal_model_zero_noise_chip() {
    use uslink::channel::{ChannelDraw, NoiseDraw};
    use uslink::modem::synthesize_chip;

    let p = LinkParams {
        ep: 1.0,
        ..LinkParams::from_snr_db(2, 0.0)
    }
    .with_rho(0.5);
    let quiet = NoiseDraw::zeros(2);
    let obs = synthesize_chip(0, &p, ChannelDraw { h: 1.0, h_bar: 1.0 }, &quiet).unwrap();

    assert!((obs.y1[0] - 0.5f64.sqrt()).abs() < 1e-12);
    assert!((obs.y2[0] - 0.5).abs() < 1e-12);
    assert_eq!((obs.y1[1], obs.y2[1]), (0.0, 0.0));
}

#[test]
fn channel_gamma_kernel_moment() {
    use uslink::channel::FadingSampler;
    use uslink::rng::block_stream;

    let model = ChannelModel::intra_body_ultrasound();
    let sampler = FadingSampler::new(&model, false).unwrap();
    let mut rng = block_stream(1, 0);
    let n = 200_000;
    let mean: f64 = (0..n)
        .map(|_| sampler.sample(&mut rng).powf(2.0 * 0.59))
        .sum::<f64>()
        / n as f64;
    assert!((mean - 0.05).abs() < 0.002);
}

#[test]
fn channel_estimation_error() {
    use uslink::channel::sample_estimation_error;
    use uslink::rng::block_stream;

    let mut rng = block_stream(2, 0);
    assert_eq!(sample_estimation_error(0.0, &mut rng).unwrap(), 0.0);
    assert!(sample_estimation_error(-1.0, &mut rng).is_err());
}

#[test]
fn receivers_decisions() {
    use uslink::channel::ChannelDraw;
    use uslink::modem::ChipObservation;

    let obs = ChipObservation {
        y1: vec![0.7, 0.0],
        y2: vec![0.6, 0.4],
        truth: 0,
        draw: ChannelDraw { h: 1.0, h_bar: 1.0 },
    };
    let d = decide_sdjd(&obs);
    assert_eq!(d.index_hat, 0);
    assert!((d.metric[0] - 1.3).abs() < 1e-12 && d.metric[1] == 0.4);

    let p = LinkParams {
        ep: 1.0,
        ..LinkParams::from_snr_db(2, 0.0)
    }
    .with_rho(0.5);
    let d = decide_sdsd(&obs, &p);
    assert_eq!(d.index_hat, 0);
}

#[test]
fn receivers_spreading() {
    use uslink::modem::{modulate, spread};

    let one = modulate(&[1], 2).unwrap();
    let chips = spread(&one, &[1, 0]).unwrap();
    assert_eq!(chips.indices, vec![1, 0]);
    let zero = modulate(&[0], 2).unwrap();
    assert_eq!(spread(&zero, &[1, 0]).unwrap().indices, vec![0, 1]);
}

#[test]
fn error_rates_endpoints() {
    let gamma = 10f64.powf(0.9);
    let q = ConditionedBerQuery::new(ReceiverKind::Sdjd, gamma, 1.0, 50.0);
    assert_eq!(ber_2ppm_closed(&q).unwrap(), ber_cd(gamma));
    let q = ConditionedBerQuery::new(ReceiverKind::Sdjd, gamma, 0.0, 50.0);
    assert_eq!(ber_2ppm_closed(&q).unwrap(), ber_ed(gamma, 50.0));
}

#[test]
fn error_rates_m2_collapse() {
    let gamma = 10f64.powf(0.9);
    let quad = QuadratureSpec::default();
    for i in 1..10 {
        let rho = i as f64 / 10.0;
        let q = ConditionedBerQuery::new(ReceiverKind::Sdjd, gamma, rho, 50.0);
        let integral = ber_mppm_numeric(&q, &quad).unwrap();
        let closed = ber_2ppm_closed(&q).unwrap();
        assert!((integral - closed).abs() < 1e-6);
    }
}

#[test]
fn error_rates_bit_conversion() {
    use uslink::theory::bit_error_from_symbol;

    assert_eq!(bit_error_from_symbol(0.1, 2).unwrap(), 0.1);
    assert!((bit_error_from_symbol(0.3, 4).unwrap() - 0.2).abs() < 1e-15);
}

#[test]
fn capacity_branch_ordering() {
    let gamma = 10f64.powf(0.9);
    let cap = |receiver, rho, seed| {
        capacity(
            &CapacityQuery {
                receiver,
                rho,
                c_dim: 50.0,
                m_order: 2,
                draws: 100_000,
                seed,
            },
            &CapacityChannel::Conditioned { gamma, h: 1.0 },
        )
        .unwrap()
    };

    let ed = cap(ReceiverKind::Ed, 0.0, 1);
    let cd = cap(ReceiverKind::Cd, 1.0, 2);
    let sdsd = cap(ReceiverKind::Sdsd, 0.5, 3);

    assert!(ed.bits < 0.5 && cd.bits > 0.95);
    assert!(sdsd.bits > cd.bits - 2.0 * (sdsd.std_err + cd.std_err));
}

#[test]
fn splitting_ratio_optima() {
    let gamma = 10f64.powf(0.9);
    let sdsd = optimal_rho(ReceiverKind::Sdsd, gamma, 50.0, 1.0).unwrap();
    let sdjd = optimal_rho(ReceiverKind::Sdjd, gamma, 50.0, 1.0).unwrap();
    assert!((sdsd - 0.770).abs() < 1e-3);
    assert!((sdjd - 0.934).abs() < 1e-3);

    let at = |receiver, rho| {
        ber_2ppm_closed(&ConditionedBerQuery::new(receiver, gamma, rho, 50.0)).unwrap()
    };
    let min_sdsd = at(ReceiverKind::Sdsd, sdsd);
    let min_sdjd = at(ReceiverKind::Sdjd, sdjd);
    assert!((min_sdsd - min_sdjd).abs() < 1e-10);
}

#[test]
fn splitting_ratio_spreading_vs_power() {
    let gamma = 10f64.powf(0.6);
    let (g2, c2) = apply_spreading(gamma, 50.0, 2).unwrap();
    let spread =
        ber_2ppm_closed(&ConditionedBerQuery::new(ReceiverKind::Sdjd, g2, 0.5, c2)).unwrap();
    let boosted =
        ber_2ppm_closed(&ConditionedBerQuery::new(ReceiverKind::Sdjd, g2, 0.5, 50.0)).unwrap();
    assert!(boosted < spread);
}

#[test]
fn simulation_worker_invariance() {
    let cfg = SimConfig::new(
        LinkParams::from_snr_db(2, 9.0).with_rho(0.5),
        ChannelModel::Gaussian,
        ReceiverKind::Sdjd,
    )
    .with_symbols(50_000)
    .with_seed(123);

    let one = simulate_ber(&cfg.with_workers(1)).unwrap();
    let four = simulate_ber(&cfg.with_workers(4)).unwrap();
    assert_eq!(one.errors_counted, four.errors_counted);
}

#[test]
fn simulation_sweep_endpoints() {
    let cfg = SimConfig::new(
        LinkParams::from_snr_db(2, 9.0),
        ChannelModel::Gaussian,
        ReceiverKind::Sdjd,
    )
    .with_symbols(50_000)
    .with_seed(9);

    let grid = [0.0, 0.5, 1.0];
    let points = sweep(SweepAxis::Rho, &grid, &cfg, &SweepOptions::default()).unwrap();
    let endpoints: Vec<f64> = points.into_iter().map(|p| p.unwrap().theory.ber).collect();

    assert_eq!(endpoints[0], ber_ed(cfg.params.nominal_snr(), 50.0));
    assert_eq!(endpoints[2], ber_cd(cfg.params.nominal_snr()));
}
