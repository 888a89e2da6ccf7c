//! End-to-end acceptance checks against the `ivp` binary. Each criterion
//! prints one PASS/FAIL line to stderr, outside the test harness capture so
//! the lines show up in a plain `cargo test` log.

mod common;

use std::io::Write;

use common::{ivp, Run};
use ivp_core::blackwell::binary_symmetric;
use ivp_core::signaling::marginal_benefit;
use serde_json::Value;

fn verdict(n: u32, what: &str, failures: &[String]) {
    let line = if failures.is_empty() {
        format!("PASS criterion {n}: {what}\n")
    } else {
        format!("FAIL criterion {n}: {what}: {}\n", failures.join("; "))
    };
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(failures.is_empty(), "criterion {n}: {failures:?}");
}

/// Collects failed checks instead of stopping at the first one.
#[derive(Default)]
struct Checks(Vec<String>);

impl Checks {
    fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.0.push(msg());
        }
    }

    fn ran(&mut self, r: &Run) {
        self.check(r.code == 0, || format!("exit code {}: {}", r.code, r.stderr.trim()));
    }
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

#[test]
fn criterion_01_chain_campaign() {
    let r = ivp(&["verify-ivp", "--trials", "10000", "--seed", "0"]);
    let mut c = Checks::default();
    c.ran(&r);
    let res = &r.report()["results"];
    let trials = res["pooling_trials"].as_u64().unwrap() + res["garbling_trials"].as_u64().unwrap();
    c.check(trials == 10_000, || format!("{trials} trials ran"));
    c.check(res["pooling_trials"].as_u64() > Some(0), || "no pooling trials".into());
    c.check(res["garbling_trials"].as_u64() > Some(0), || "no garbling trials".into());
    c.check(res["chain_violations"] == 0, || format!("chain violations {}", res["chain_violations"]));
    c.check(res["trial_errors"] == 0, || format!("trial errors {}", res["trial_errors"]));
    let min = f(&res["min_chain_residual"]);
    c.check(min >= -1e-10, || format!("min chain residual {min:e}"));
    verdict(1, "10000 seeded trials, zero chain violations at 1e-10", &c.0);
}

#[test]
fn criterion_02_disagreement_ordering() {
    let r = ivp(&["verify-ivp", "--trials", "10000", "--seed", "0"]);
    let mut c = Checks::default();
    c.ran(&r);
    let res = &r.report()["results"];
    c.check(res["disagreement_violations"] == 0, || format!("violations {}", res["disagreement_violations"]));
    c.check(res["verdict_mismatches"] == 0, || format!("verdict mismatches {}", res["verdict_mismatches"]));
    let min = f(&res["min_disagreement_residual"]);
    c.check(min >= -1e-10, || format!("min residual {min:e}"));
    verdict(2, "disagreement ordering on the same instances, verdicts agree", &c.0);
}

#[test]
fn criterion_03_three_state_example() {
    let r = ivp(&["counterexamples", "--example", "middle_reveal", "--x", "0.1,0.5,0.9"]);
    let mut c = Checks::default();
    c.ran(&r);
    let rows = r.csv_floats("middle_reveal.csv");
    c.check(rows.len() == 3, || format!("{} rows", rows.len()));
    for row in &rows {
        let (x, m_b, expects) = (row[0], row[2], row[3]);
        // B's mean over states (1, 2) with weights (x, 1 − x)
        c.check((m_b - (2.0 - x)).abs() < 1e-12, || format!("x {x}: m_b {m_b}"));
        c.check(expects == 2.0, || format!("x {x}: expectation {expects} is not exactly 2"));
        c.check(m_b < expects, || format!("x {x}: direction does not fail"));
    }
    verdict(3, "expected cross mean is exactly 2 and direction fails for x in {0.1, 0.5, 0.9}", &c.0);
}

#[test]
fn criterion_04_sampled_constructions() {
    let r = ivp(&["counterexamples", "--example", "sampled", "--samples", "1000", "--seed", "0"]);
    let mut c = Checks::default();
    c.ran(&r);
    let res = &r.report()["results"];
    for side in ["direction", "undershoot"] {
        let certified = &res[format!("{side}_certified")];
        c.check(*certified == 1000, || format!("{side}: {certified} of 1000 certified"));
        let worst = f(&res[format!("{side}_max_residual")]);
        c.check(worst < -1e-10, || format!("{side}: worst residual {worst:e}"));
    }
    verdict(4, "1000 sampled prior pairs give strict violations for both constructions", &c.0);
}

#[test]
fn criterion_05_blackwell_lp() {
    let r = ivp(&["blackwell-check", "--more", "binary_symmetric:0.9", "--less", "binary_symmetric:0.7"]);
    let mut c = Checks::default();
    c.ran(&r);
    let res = &r.report()["results"];
    let k = &res["kernel"]["rows"];
    for (i, j, want) in [(0, 0, 0.75), (0, 1, 0.25), (1, 0, 0.25), (1, 1, 0.75)] {
        let q = f(&k[i][j]);
        c.check((q - want).abs() <= 1e-8, || format!("kernel[{i}][{j}] = {q}"));
    }
    c.check(res["less_dominates_more"] == false, || "reverse direction reported feasible".into());
    c.check(res["round_trips"] == 1000, || format!("{} round trips", res["round_trips"]));
    let failures = res["round_trip_failures"].as_array().map_or(usize::MAX, Vec::len);
    c.check(failures == 0, || format!("{failures} round trip failures"));
    verdict(5, "flip kernel 0.25 within 1e-8, reverse infeasible, 1000 round trips", &c.0);
}

#[test]
fn criterion_06_testing_game_closed_forms() {
    let r = ivp(&["testing-game", "--cost", "0.3", "--accuracies", "0.5,0.7,0.9,1.0"]);
    let mut c = Checks::default();
    c.ran(&r);
    let statics = r.csv_floats("statics.csv");
    c.check(statics.len() == 4, || format!("{} accuracy rows", statics.len()));
    let (blind, perfect) = (&statics[0], &statics[3]);
    c.check(blind[2] == 0.0 && blind[3] == 0.0, || format!("uninformative cutoffs {blind:?}"));
    c.check((perfect[2] - 0.6).abs() <= 1e-6, || format!("fully informative cutoff {}", perfect[2]));
    for w in statics.windows(2) {
        c.check(w[1][2] >= w[0][2] - 1e-7 && w[1][3] >= w[0][3] - 1e-7, || {
            format!("cutoffs fall from accuracy {} to {}", w[0][1], w[1][1])
        });
    }

    let text = r.file("equilibria.csv");
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let mut interior = 0;
    for rec in rd.records() {
        let rec = rec.unwrap();
        let num = |i: usize| rec[i].parse::<f64>().unwrap();
        match &rec[1] {
            "interior" => {
                interior += 1;
                let (t, dm, lv, dp) = (num(2), num(5), num(6), num(7));
                c.check(dm < t && t <= lv + 1e-9 && lv <= dp + 1e-9, || {
                    format!("{}: sandwich {dm} < {t} <= {lv} <= {dp}", &rec[0])
                });
            }
            "all_test" if rec[0].ends_with("_0.5") => {}
            kind if rec[0].ends_with("_0.5") => c.check(false, || format!("uninformative test gives {kind}")),
            _ => {}
        }
    }
    c.check(interior >= 1, || "no interior cutoff solved".into());
    verdict(6, "corner at 0, interior 0.6, monotone in accuracy, sandwich at interior cutoffs", &c.0);
}

#[test]
fn criterion_07_certifier() {
    let r = ivp(&["testing-game", "--cost", "0.3", "--accuracies", "0.5,0.7,0.9,1.0"]);
    let mut c = Checks::default();
    c.ran(&r);
    let best = &r.report()["results"]["certifier"];
    let (price, cutoff, profit) = (f(&best["price"]), f(&best["cutoff"]), f(&best["profit"]));
    c.check((price - 0.5).abs() <= 1e-9, || format!("price {price}"));
    c.check(cutoff.abs() <= 1e-9, || format!("cutoff {cutoff}"));
    c.check((profit - 0.5).abs() <= 1e-9, || format!("profit {profit}"));
    c.check(best["test_id"] == "binary_symmetric_0.5", || format!("test {}", best["test_id"]));
    verdict(7, "certifier sells the uninformative test at 0.5 to every type", &c.0);
}

#[test]
fn criterion_08_lcse_closed_form() {
    let r = ivp(&["signaling-game", "--experiment", "uninformative", "--cost", "quadratic"]);
    let mut c = Checks::default();
    c.ran(&r);
    let rows = r.csv_floats("lcse.csv");
    c.check(rows.len() > 100, || format!("{} nodes", rows.len()));
    let defect = rows
        .iter()
        .map(|row| (row[1] - 0.5 + 0.5 * (-2.0 * row[1]).exp() - row[0]).abs())
        .fold(0.0, f64::max);
    c.check(defect <= 1e-6, || format!("closed-form defect {defect:e}"));
    let residual = f(&r.report()["results"]["max_residual"]);
    c.check(residual <= 1e-7, || format!("ode residual {residual:e}"));
    verdict(8, "uninformative quadratic equilibrium matches the implicit closed form", &c.0);
}

#[test]
fn criterion_09_ranked_pairs() {
    let r = ivp(&["signaling-game", "--pairs", "1000", "--seed", "0"]);
    let mut c = Checks::default();
    c.ran(&r);
    let p = &r.report()["results"]["pairs"];
    c.check(p["pairs"] == 1000, || format!("{} pairs", p["pairs"]));
    c.check(p["mb_violations"] == 0, || format!("marginal benefit violations {}", p["mb_violations"]));
    c.check(p["cost_violations"] == 0, || format!("cost violations {}", p["cost_violations"]));
    let mb = marginal_benefit(0.5_f64, &binary_symmetric(0.75).unwrap()).unwrap();
    c.check((mb - 0.75).abs() <= 1e-10, || format!("spot value {mb}"));
    verdict(9, "1000 ranked pairs ordered in marginal benefit and cost, spot value 0.75", &c.0);
}

#[test]
fn criterion_10_reversals() {
    let z = 0.3;
    let r = ivp(&["appendix-b", "--z", "0.3"]);
    let mut c = Checks::default();
    c.ran(&r);
    let text = r.file("convex_payoff.csv");
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let (mut strict, mut equal) = (0, 0);
    for rec in rd.records() {
        let rec = rec.unwrap();
        let t: f64 = rec[1].parse().unwrap();
        let floor = 1.0 / ((1.0 - t) * (1.0 - t));
        let value: f64 = rec[2].parse().unwrap();
        let blind = rec[0].starts_with("uninformative");
        if blind {
            equal += 1;
            c.check((value - floor).abs() <= 1e-12 * floor, || format!("{} t {t}: {value} != {floor}", &rec[0]));
        } else {
            strict += 1;
            c.check(value > floor, || format!("{} t {t}: {value} not above {floor}", &rec[0]));
        }
    }
    c.check(strict > 0 && equal > 0, || "grid misses a case".into());
    for row in r.csv_floats("three_state.csv") {
        let (t, un, inf, un_fd, inf_fd) = (row[0], row[1], row[2], row[3], row[4]);
        let closed = 2.0 * z / (1.0 + t);
        c.check((un - z).abs() <= 1e-12 && (inf - closed).abs() <= 1e-12, || format!("t {t}: closed forms"));
        c.check((un_fd - z).abs() <= 1e-8, || format!("t {t}: uninformative numeric {un_fd}"));
        c.check((inf_fd - closed).abs() <= 1e-8, || format!("t {t}: informative numeric {inf_fd}"));
        c.check(closed >= z, || format!("t {t}: no reversal"));
    }
    verdict(10, "convex payoff and three-state reversals", &c.0);
}

#[test]
fn criterion_11_determinism() {
    let commands: [&[&str]; 8] = [
        &["verify-ivp", "--trials", "10000"],
        &["counterexamples", "--example", "middle_reveal"],
        &["counterexamples", "--example", "sampled", "--samples", "1000"],
        &["blackwell-check"],
        &["testing-game"],
        &["signaling-game", "--experiment", "uninformative"],
        &["signaling-game", "--pairs", "1000"],
        &["appendix-b"],
    ];
    let mut c = Checks::default();
    for cmd in commands {
        let runs: Vec<Run> = ["1", "4", "1"]
            .iter()
            .map(|n| ivp(&[cmd, &["--threads", n][..]].concat()))
            .collect();
        for r in &runs {
            c.ran(r);
        }
        let bodies: Vec<Vec<(String, String)>> = runs
            .iter()
            .map(|r| {
                let mut files: Vec<(String, String)> = std::fs::read_dir(&r.dir)
                    .unwrap()
                    .map(|e| e.unwrap().file_name().into_string().unwrap())
                    .filter(|n| n != "run_meta.json")
                    .map(|n| (n.clone(), r.file(&n)))
                    .collect();
                files.sort();
                files
            })
            .collect();
        c.check(bodies[0] == bodies[1] && bodies[1] == bodies[2], || format!("{} differs between runs", cmd.join(" ")));
    }
    verdict(11, "byte-identical reports and tables across repeats and thread counts", &c.0);
}
