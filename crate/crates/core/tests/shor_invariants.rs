use pqc_core::arith::{gcd, order_by_search};
use pqc_core::shor::ShorReadout;
use pqc_core::{run_pqc_shor, ExecPolicy, ShorParams};

fn n2_distributions(params: &ShorParams) -> Vec<Vec<f64>> {
    let (ensemble, _, _) =
        run_pqc_shor::<f64>(params, ShorReadout::Expected, 0, &ExecPolicy::default()).unwrap();
    let layout = params.layout().unwrap();
    ensemble
        .constituents()
        .iter()
        .map(|c| c.n2_distribution(&layout))
        .collect()
}

#[test]
fn distributions_identical_across_constituents() {
    for (nb, a) in [
        (15, 7),
        (15, 2),
        (21, 2),
        (21, 5),
        (33, 5),
        (35, 3),
        (35, 4),
    ] {
        for n1 in 1..=3 {
            let params =
                ShorParams::with_n2(nb, a, pqc_core::shor::argument_qubits_for(nb).unwrap() - n1)
                    .unwrap();
            let dists = n2_distributions(&params);
            let worst = dists
                .iter()
                .flat_map(|d| d.iter().zip(&dists[0]).map(|(x, y)| (x - y).abs()))
                .fold(0.0, f64::max);
            assert!(worst < 1e-10, "nb {nb} a {a} n1 {n1}: {worst:e}");
        }
    }
}

/// When `r` divides `N2` the comb is exact: `r` peaks at multiples of
/// `N2/r`, each with probability `1/r`.
#[test]
fn exact_comb_when_order_divides_n2() {
    for (nb, a) in [(15u64, 7u64), (15, 2), (15, 4), (15, 11), (17, 3), (51, 2)] {
        let r = order_by_search(a, nb).unwrap();
        let n = pqc_core::shor::argument_qubits_for(nb).unwrap();
        let params = ShorParams::new(nb, a, 2, n - 2).unwrap();
        let n2_size = 1u64 << params.n2;
        if !n2_size.is_multiple_of(r) {
            continue;
        }
        for d in n2_distributions(&params) {
            for (k, p) in d.iter().enumerate() {
                let expected = if (k as u64).is_multiple_of(n2_size / r) {
                    1.0 / r as f64
                } else {
                    0.0
                };
                assert!((p - expected).abs() < 1e-10, "nb {nb} a {a} k {k}: {p}");
            }
        }
    }
}

#[test]
fn recovered_order_is_minimal() {
    for nb in [15u64, 21, 33, 35, 39] {
        for a in 2..nb {
            if gcd(a, nb) != 1 {
                continue;
            }
            let n = pqc_core::shor::argument_qubits_for(nb).unwrap();
            let params = ShorParams::new(nb, a, 1, n - 1).unwrap();
            let (_, _, report) =
                run_pqc_shor::<f64>(&params, ShorReadout::Expected, 0, &ExecPolicy::default())
                    .unwrap();
            assert_eq!(report.r, order_by_search(a, nb), "nb {nb} a {a}");
            if let Some((p, q)) = report.factors {
                assert_eq!(p * q, nb);
                assert!(p > 1 && q > 1);
            }
        }
    }
}

#[test]
fn sampled_readout_finds_15_7() {
    let params = ShorParams::new(15, 7, 2, 6).unwrap();
    let readout = ShorReadout::Sampled {
        molecules_per_constituent: 4000,
    };
    let (_, spectrum, report) =
        run_pqc_shor::<f64>(&params, readout, 9, &ExecPolicy::default()).unwrap();
    assert_eq!(report.r, Some(4));
    assert_eq!(report.factors, Some((3, 5)));
    assert_eq!(spectrum.transitions(), 16);
}
