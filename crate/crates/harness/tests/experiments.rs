use wpbc::algorithms::algorithm1_feasibility;
use wpbc_harness::experiments::{
    compare_models, max_snr_bound, tdma_comparison, trace_region, zdc_vs_kn, TDMA_FRAME,
};
use wpbc_harness::spec::{
    Algorithm, CompareParams, Design, Experiment, GridParams, Model, RegionParams, RunSpec, Scenario, TdmaParams,
    Variant,
};
use wpbc_harness::HarnessError;

fn region(targets_db: Vec<f64>) -> RegionParams {
    RegionParams {
        targets_db,
        step_db: 2.0,
        algorithm: Algorithm::Alg2,
        design: Design::Forward,
        model: Model::Nonlinear,
    }
}

#[test]
fn targets_above_single_tone_bound_are_all_infeasible() {
    let s = Scenario::standard(4, 1, 10.0, 0.0, 3, 1);
    let ch = s.channel(0, 1, 4).unwrap();
    let top = 10.0 * max_snr_bound(&s.system, &ch).log10();
    let r = trace_region(&s, &region(vec![top + 0.5, top + 3.0])).unwrap();
    assert!(r.points.iter().all(|p| !p.feasible() && p.z_dc().is_none()));
    assert_eq!(r.anchors.len(), 2);
}

#[test]
fn tradeoff_is_non_increasing_in_target() {
    let s = Scenario::standard(6, 2, 10.0, 0.0, 12, 1);
    let r = trace_region(&s, &region(vec![])).unwrap();
    let z: Vec<f64> = r.points.iter().filter_map(|p| p.z_dc()).collect();
    assert!(z.len() >= 3);
    for w in z.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-6), "{} -> {}", w[0], w[1]);
    }
    let first = r.points.first().unwrap();
    assert_eq!(first.target_db, -10.0);
    let wpt = r.anchors.iter().find(|a| a.kind == "wpt").unwrap();
    assert!(wpt.total >= z[0] * (1.0 - 1e-6));
}

#[test]
fn single_tone_models_coincide() {
    let s = Scenario::standard(1, 1, 10.0, 0.0, 4, 3);
    let p = CompareParams {
        targets_db: vec![0.0],
        n_tones: vec![1],
        algorithm: Algorithm::Alg2,
    };
    for x in compare_models(&s, &p).unwrap() {
        if let (Some(a), Some(b)) = (x.z_nonlinear_design, x.z_linear_design) {
            assert!((a - b).abs() <= 1e-9 * a, "{a} vs {b}");
        }
    }
}

#[test]
fn nonlinear_design_dominates_at_sixteen_tones() {
    let s = Scenario::standard(16, 1, 10.0, 0.0, 8, 2);
    let p = CompareParams {
        targets_db: vec![0.0],
        n_tones: vec![16],
        algorithm: Algorithm::Alg3,
    };
    let pairs = compare_models(&s, &p).unwrap();
    for x in &pairs {
        assert!(x.gap().unwrap() >= -1e-6 * x.z_linear_design.unwrap());
    }
}

#[test]
fn tdma_full_slot_leaves_other_tag_empty() {
    let mut s = Scenario::standard(4, 2, 10.0, -10.0, 6, 3);
    s.system = s.system_for(2, 4, 0);
    let p = TdmaParams {
        target_db: -10.0,
        energy_conserving: false,
        algorithm: Algorithm::Alg3,
    };
    let t = tdma_comparison(&s, &p).unwrap();
    assert!(t.used > 0);
    assert_eq!(t.split_avg[TDMA_FRAME][1], 0.0);
    assert_eq!(t.split_avg[0][0], 0.0);
    assert!(t.split_avg[5][0] > 0.0 && t.split_avg[5][1] > 0.0);
    let half = t.split_avg[5][0] / t.split_avg[TDMA_FRAME][0];
    assert!((half - 0.5).abs() < 1e-12);

    let e = tdma_comparison(
        &s,
        &TdmaParams {
            energy_conserving: true,
            ..p
        },
    )
    .unwrap();
    assert!(e.split_avg[5][0] >= t.split_avg[5][0]);
}

#[test]
fn forward_design_beats_backscatter_only_design() {
    let s = Scenario::standard(16, 1, 10.0, 0.0, 9, 2);
    let p = GridParams {
        cells: vec![(1, 16)],
        target_db: 3.0,
        variants: vec![
            Variant::new(Model::Nonlinear, Algorithm::Alg2, Design::Forward),
            Variant::new(Model::Nonlinear, Algorithm::Alg2, Design::BackscatterOnly),
        ],
    };
    let g = zdc_vs_kn(&s, &p).unwrap();
    let fwd = g.cells[0].avg_z_dc.unwrap();
    let bso = g.cells[1].avg_z_dc.unwrap();
    assert!(fwd >= bso * (1.0 - 1e-6), "{fwd} < {bso}");
    assert_eq!(g.cells[0].failure_rate(), 0.0);
}

#[test]
fn invalid_specs_are_rejected() {
    let s = Scenario::standard(4, 1, 10.0, 0.0, 1, 1);
    let bad = [
        Experiment::Region(region(vec![3.0, 1.0])),
        Experiment::Tdma(TdmaParams {
            target_db: 0.0,
            energy_conserving: false,
            algorithm: Algorithm::Alg2,
        }),
        Experiment::Grid(GridParams {
            cells: vec![(3, 2)],
            target_db: 0.0,
            variants: Variant::all(),
        }),
    ];
    for experiment in bad {
        let spec = RunSpec {
            scenario: s.clone(),
            experiment,
        };
        assert!(matches!(spec.validate(), Err(HarnessError::Spec(_))));
    }
    let mut none = s.clone();
    none.channels = wpbc_harness::spec::ChannelSource::Drawn { seed: 1, realizations: 0 };
    assert!(none.validate().is_err());
}

#[test]
fn stored_channels_are_used_in_order() {
    let s = Scenario::standard(4, 2, 10.0, 0.0, 1, 2);
    let stored: Vec<_> = (0..2).map(|r| s.channel(r, 2, 4).unwrap().to_file()).collect();
    let replayed = Scenario {
        channels: wpbc_harness::spec::ChannelSource::Replay { channels: stored },
        ..s.clone()
    };
    for r in 0..2 {
        assert_eq!(replayed.channel(r, 2, 4).unwrap(), s.channel(r, 2, 4).unwrap());
    }
    assert_eq!(replayed.channel(1, 1, 4).unwrap().n_tags(), 1);
    assert!(replayed.channel(0, 2, 8).is_err());
}

#[test]
fn infeasible_probe_with_stalled_certificate_is_classified() {
    let s = Scenario::standard(8, 1, 20.0, 3.0, 2032, 30);
    let ch = s.channel(20, 3, 8).unwrap();
    let cfg = s.system_for(3, 8, 20).with_targets(10f64.powf(0.3));
    let f = algorithm1_feasibility(&cfg, &ch).unwrap();
    assert!(f.delta_star > 1.0);
}
