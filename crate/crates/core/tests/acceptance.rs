//! Acceptance suite. Run with
//! `cargo test -p hsbound --release --test acceptance -- --nocapture`
//! to see one line per criterion.

use std::fmt::Write as _;

use rayon::prelude::*;

use hsbound::bounds::{build_report_with_tol, check_lemma1, check_weyl};
use hsbound::experiments::{find_conjecture_counterexample, q_envelope, run_figure1, SearchOutcome};
use hsbound::metrics::{hs_distance, q_ratio, trace_distance, SignedDecomposition};
use hsbound::sampling::{fig1_rho, fig1_sigma, ginibre_fixed_rank, haar_pure, RngStream};
use hsbound::states::{projector_state, DensityMatrix};
use hsbound::{bounds::reduced_rank, cli};

enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

struct Line {
    id: u8,
    name: &'static str,
    verdict: Verdict,
    detail: String,
}

fn line(id: u8, name: &'static str, ok: bool, detail: String) -> Line {
    Line {
        id,
        name,
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        detail,
    }
}

fn bound_chain_and_dominance() -> (Line, Line) {
    let mut ok1 = true;
    let mut ok2 = true;
    let mut d1 = String::new();
    let mut d2 = String::new();
    for d in [16usize, 32] {
        let run = run_figure1(d, 20_000, 0).expect("figure1 run");
        let cap_d = d as f64 / 4.0;
        let chain_bad = run
            .records
            .iter()
            .filter(|r| !(r.q_ratio >= 0.5 - 1e-9 && r.q_ratio <= r.reduced_rank.min(cap_d) + 1e-9))
            .count();
        let dom_bad = run
            .records
            .iter()
            .filter(|r| r.rank_rho + r.rank_sigma <= d)
            .filter(|r| r.upper_theorem1 > r.upper_rank_sum + 1e-12 || r.upper_rank_sum > r.upper_norm_equiv + 1e-12)
            .count();

        // Envelope: max Q per R-bin should reach R at small R and saturate somewhere.
        // The median is reported only; at d=32 mid-range bins sit near 0.8.
        let mut ratios: Vec<(f64, f64)> = q_envelope(&run.records)
            .iter()
            .filter(|b| b.reduced_rank <= cap_d)
            .map(|b| (b.reduced_rank, b.max_q / b.reduced_rank))
            .collect();
        let low_r_min = ratios
            .iter()
            .filter(|(r, _)| *r <= 1.0)
            .map(|&(_, q)| q)
            .fold(f64::INFINITY, f64::min);
        ratios.sort_by(|a, b| a.1.total_cmp(&b.1));
        let median = ratios[ratios.len() / 2].1;
        let best = ratios[ratios.len() - 1].1;
        let envelope_ok = low_r_min >= 0.95 && best >= 1.0 - 1e-9;

        ok1 &= chain_bad == 0 && run.summary.violations == 0 && envelope_ok;
        ok2 &= dom_bad == 0;
        let _ = write!(
            d1,
            "d={d} n={} chain_bad={chain_bad} violations={} envelope(min Q/R for R<=1={low_r_min:.4}, best={best:.6}, median={median:.4}, bins={}); ",
            run.records.len(),
            run.summary.violations,
            ratios.len()
        );
        let _ = write!(d2, "d={d} dominance_bad={dom_bad}; ");
    }
    (
        line(1, "bound chain 1/2 <= Q <= min(R, d/4)", ok1, d1),
        line(2, "reduced-rank <= rank-sum <= norm-equivalence", ok2, d2),
    )
}

fn projector_vs_mixed() -> Line {
    let mut worst: f64 = 0.0;
    let mut rows = 0;
    for d in [4usize, 8, 16, 32] {
        let df = d as f64;
        let sigma = DensityMatrix::maximally_mixed(d).unwrap();
        for r in 1..d {
            let rf = r as f64;
            let rho = projector_state(d, r, 0).unwrap();
            let big_r = reduced_rank(r, d).unwrap();
            let want = [
                (df - rf) / df,
                (df - rf) / (df * rf),
                big_r * (df * df - rf * rf) / (df * df),
            ];
            let got = [
                trace_distance(&rho, &sigma).unwrap(),
                hs_distance(&rho, &sigma).unwrap(),
                q_ratio(&rho, &sigma).unwrap().unwrap(),
            ];
            for (g, w) in got.iter().zip(want) {
                worst = worst.max((g - w).abs());
            }
            rows += 1;
        }
    }
    line(
        3,
        "projector vs maximally mixed closed forms",
        worst <= 1e-10,
        format!("rows={rows} max_residual={worst:e}"),
    )
}

fn orthogonal_projectors() -> Line {
    let d = 32;
    let mut worst: f64 = 0.0;
    let mut rows = 0;
    for r in 1..d {
        let rho = projector_state(d, r, 0).unwrap();
        for s in 1..=(d - r) {
            let sigma = projector_state(d, s, r).unwrap();
            let q = q_ratio(&rho, &sigma).unwrap().unwrap();
            worst = worst.max((q - reduced_rank(r, s).unwrap()).abs());
            rows += 1;
        }
    }
    line(
        4,
        "orthogonal projectors saturate Q = R at d=32",
        worst <= 1e-10,
        format!("pairs={rows} max |Q-R|={worst:e}"),
    )
}

fn pure_identity() -> Line {
    let worst = (0..1000u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::new(5, i);
            let a = haar_pure(8, &mut rng).unwrap();
            let b = haar_pure(8, &mut rng).unwrap();
            let td = trace_distance(&a, &b).unwrap();
            (td * td - 0.5 * hs_distance(&a, &b).unwrap()).abs()
        })
        .reduce(|| 0.0, f64::max);
    line(
        5,
        "pure-state identity D^2 = D_HS/2",
        worst <= 1e-10,
        format!("pairs=1000 d=8 max gap={worst:e}"),
    )
}

/// Mixed pair: alternates the figure-1 ensemble with Ginibre states of random rank.
fn mixed_pair(d: usize, rng: &mut RngStream, index: u64) -> (DensityMatrix, DensityMatrix) {
    if index.is_multiple_of(2) {
        (fig1_rho(d, rng).unwrap(), fig1_sigma(d, rng).unwrap())
    } else {
        let r = rng.uniform_int(1, d);
        let s = rng.uniform_int(1, d);
        (
            ginibre_fixed_rank(d, r, rng).unwrap(),
            ginibre_fixed_rank(d, s, rng).unwrap(),
        )
    }
}

fn signed_ranks_and_weyl() -> Line {
    let d = 16;
    let tol = 1e-10;
    let bad = (0..10_000u64)
        .into_par_iter()
        .filter(|&i| {
            let mut rng = RngStream::new(6, i);
            let (rho, sigma) = mixed_pair(d, &mut rng, i);
            let sd = SignedDecomposition::new(&rho, &sigma).unwrap();
            let lemma = check_lemma1(&sd, rho.rank_with_tolerance(tol), sigma.rank_with_tolerance(tol), tol);
            let weyl = check_weyl(rho.spectrum(), sigma.spectrum(), sd.delta_spectrum(), 1e-10);
            !(lemma.holds && weyl)
        })
        .count();
    line(
        6,
        "rank of signed parts and Weyl domination",
        bad == 0,
        format!("pairs=10000 d=16 failures={bad}"),
    )
}

fn entropy_bounds() -> Line {
    let mut detail = String::new();
    let mut ok = true;
    for d in [4usize, 16] {
        let bad = (0..10_000u64)
            .into_par_iter()
            .filter(|&i| {
                let mut rng = RngStream::new(7, i);
                let (rho, sigma) = mixed_pair(d, &mut rng, i);
                let rep = build_report_with_tol(&rho, &sigma, 1e-10).unwrap();
                let d2 = rep.trace_distance_sq();
                d2 > rep.upper_entropy_p2 + 1e-9 || d2 > rep.upper_entropy_p3 + 1e-9
            })
            .count();
        ok &= bad == 0;
        let _ = write!(detail, "d={d} pairs=10000 failures={bad}; ");
    }
    let tight = (0..1000u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::new(8, i);
            let a = haar_pure(16, &mut rng).unwrap();
            let b = haar_pure(16, &mut rng).unwrap();
            let rep = build_report_with_tol(&a, &b, 1e-10).unwrap();
            (rep.trace_distance_sq() - rep.upper_entropy_p2).abs()
        })
        .reduce(|| 0.0, f64::max);
    ok &= tight <= 1e-10;
    let _ = write!(detail, "pure-pure equality gap={tight:e}");
    line(7, "entropy bounds (sum and min forms)", ok, detail)
}

fn counterexample() -> Line {
    let name = "counterexample to D^2 <= D_HS / Tr(rho^2)";
    match find_conjecture_counterexample(8, 1_000_000, 0).unwrap() {
        SearchOutcome::Found(cx) => {
            let again = cx.recompute_margin().unwrap();
            let ok = cx.margin > 0.0 && again == cx.margin;
            line(
                8,
                name,
                ok,
                format!(
                    "d=8 seed={} index={} kind={:?} margin={:e} recomputed={:e}",
                    cx.seed, cx.index, cx.kind, cx.margin, again
                ),
            )
        }
        SearchOutcome::Exhausted { tried, skipped_pure } => Line {
            id: 8,
            name,
            verdict: Verdict::Inconclusive,
            detail: format!("budget exhausted tried={tried} skipped_pure={skipped_pure}"),
        },
    }
}

fn figure1_csv(threads: &str) -> Vec<u8> {
    let argv = [
        "hsbound",
        "figure1",
        "--dim",
        "16",
        "--samples",
        "1000",
        "--seed",
        "7",
        "--threads",
        threads,
    ];
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(argv, &mut out, &mut err);
    assert_eq!(code, cli::EXIT_OK, "{}", String::from_utf8_lossy(&err));
    out
}

fn determinism() -> Line {
    let base = figure1_csv("1");
    let runs = [figure1_csv("1"), figure1_csv("2"), figure1_csv("4"), figure1_csv("0")];
    let same = runs.iter().filter(|r| **r == base).count();
    let lines = base.iter().filter(|&&b| b == b'\n').count();
    line(
        9,
        "byte-identical figure1 CSV across runs and thread counts",
        same == runs.len() && lines == 1001,
        format!("bytes={} lines={lines} identical={same}/{}", base.len(), runs.len()),
    )
}

#[test]
fn acceptance() {
    let (c1, c2) = bound_chain_and_dominance();
    let lines = [
        c1,
        c2,
        projector_vs_mixed(),
        orthogonal_projectors(),
        pure_identity(),
        signed_ranks_and_weyl(),
        entropy_bounds(),
        counterexample(),
        determinism(),
    ];
    let mut failed = Vec::new();
    for l in &lines {
        let tag = match l.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => {
                failed.push(l.id);
                "FAIL"
            }
            Verdict::Inconclusive => "INCONCLUSIVE",
        };
        println!("[{tag}] {}. {}: {}", l.id, l.name, l.detail);
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
