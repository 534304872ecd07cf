//! Drives every case of downsampling and union with Monte Carlo checks.

use serde::Serialize;

use super::Check;
use crate::latent::{DiscardCounter, DownsampleBranch, LatentSample, UnionCase};
use crate::rng::{derive_seed, SeededRng};

#[derive(Debug, Clone, Serialize)]
pub struct BranchCase {
    pub name: String,
    pub operation: &'static str,
    /// Branch the inputs are meant to hit.
    pub branch: String,
    pub checks: Vec<Check>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchCoverageReport {
    pub version: u32,
    pub trials: u64,
    pub cases: Vec<BranchCase>,
    pub downsample_branches_hit: Vec<DownsampleBranch>,
    pub union_cases_hit: Vec<UnionCase>,
    pub pass: bool,
}

impl BranchCoverageReport {
    pub fn covers_everything(&self) -> bool {
        let all_down = [
            DownsampleBranch::Identity,
            DownsampleBranch::NoFullRetained,
            DownsampleBranch::NoneDeleted,
            DownsampleBranch::ItemsDeleted,
        ];
        let all_union = [
            UnionCase::BothWhole,
            UnionCase::FractionBelowOne,
            UnionCase::FractionEqualsOne,
            UnionCase::FractionAboveOne,
        ];
        all_down.iter().all(|b| self.downsample_branches_hit.contains(b))
            && all_union.iter().all(|c| self.union_cases_hit.contains(c))
    }
}

struct DownsampleInput {
    name: &'static str,
    full: usize,
    partial: bool,
    size: f64,
    target: f64,
    branch: DownsampleBranch,
}

struct UnionInput {
    name: &'static str,
    left: (usize, bool, f64),
    right: (usize, bool, f64),
    case: UnionCase,
}

const DOWNSAMPLE_CASES: &[DownsampleInput] = &[
    DownsampleInput { name: "identity", full: 2, partial: true, size: 2.6, target: 2.6, branch: DownsampleBranch::Identity },
    DownsampleInput { name: "no_full_retained", full: 2, partial: false, size: 2.0, target: 0.6, branch: DownsampleBranch::NoFullRetained },
    DownsampleInput { name: "no_full_retained_with_partial", full: 2, partial: true, size: 2.5, target: 0.5, branch: DownsampleBranch::NoFullRetained },
    DownsampleInput { name: "none_deleted_4.7_to_4.2", full: 4, partial: true, size: 4.7, target: 4.2, branch: DownsampleBranch::NoneDeleted },
    DownsampleInput { name: "none_deleted_to_integer", full: 4, partial: true, size: 4.7, target: 4.0, branch: DownsampleBranch::NoneDeleted },
    DownsampleInput { name: "items_deleted", full: 5, partial: true, size: 5.5, target: 2.75, branch: DownsampleBranch::ItemsDeleted },
    DownsampleInput { name: "items_deleted_from_integer", full: 4, partial: false, size: 4.0, target: 2.4, branch: DownsampleBranch::ItemsDeleted },
];

const UNION_CASES: &[UnionInput] = &[
    UnionInput { name: "both_whole", left: (1, false, 1.0), right: (2, false, 2.0), case: UnionCase::BothWhole },
    UnionInput { name: "fraction_below_one", left: (1, true, 1.2), right: (1, true, 1.3), case: UnionCase::FractionBelowOne },
    UnionInput { name: "fraction_below_one_single_partial", left: (2, false, 2.0), right: (0, true, 0.4), case: UnionCase::FractionBelowOne },
    UnionInput { name: "fraction_equals_one", left: (1, true, 1.4), right: (0, true, 0.6), case: UnionCase::FractionEqualsOne },
    UnionInput { name: "fraction_above_one", left: (1, true, 1.5), right: (2, true, 2.7), case: UnionCase::FractionAboveOne },
];

/// Latent sample over ids `first..`, with its exact per-item inclusion
/// probabilities.
fn build(first: usize, full: usize, partial: bool, size: f64) -> (LatentSample<usize>, Vec<(usize, f64)>) {
    let ids: Vec<usize> = (first..first + full).collect();
    let partial = partial.then_some(first + full);
    let l = LatentSample::from_parts(ids, partial, size).expect("case inputs are well formed");
    let probs = l
        .full_items()
        .iter()
        .map(|&x| (x, 1.0))
        .chain(l.partial_item().map(|&p| (p, crate::latent::frc(size))))
        .collect();
    (l, probs)
}

fn frequency_checks(counts: &[u64], expected: &[(usize, f64)], trials: u64) -> Vec<Check> {
    expected
        .iter()
        .map(|&(x, p)| Check::frequency(format!("inclusion[{x}]"), p, counts[x] as f64 / trials as f64, trials))
        .collect()
}

/// Runs every case `trials` times. The corner case of shrinking
/// `C = 4.7` to `C' = 4.2` is among the downsampling cases.
pub fn branch_coverage_suite(trials: u64, seed: u64) -> BranchCoverageReport {
    let mut cases = Vec::new();
    let mut downsample_hit = Vec::new();
    let mut union_hit = Vec::new();

    for (k, input) in DOWNSAMPLE_CASES.iter().enumerate() {
        let mut rng = SeededRng::new(derive_seed(seed, k as u64));
        let (base, before) = build(0, input.full, input.partial, input.size);
        let theta = input.target / input.size;
        let mut counts = vec![0u64; base.stored()];
        let (mut malformed, mut wrong_branch, mut wrong_size, mut bad_counter) = (0u64, 0u64, 0u64, 0u64);
        for _ in 0..trials {
            let mut l = base.clone();
            let mut counter = DiscardCounter::new();
            for _ in 0..base.stored() {
                counter.record_insert();
            }
            let branch = l.downsample_to(input.target, &mut rng, &mut counter).expect("valid downsample");
            if branch != input.branch {
                wrong_branch += 1;
            } else if !downsample_hit.contains(&branch) {
                downsample_hit.push(branch);
            }
            malformed += u64::from(l.check_structure().is_err());
            wrong_size += u64::from((l.latent_size() - input.target).abs() > 1e-12);
            bad_counter += u64::from(!counter.is_consistent());
            for &x in l.output_iter(&mut rng) {
                counts[x] += 1;
            }
        }
        let expected: Vec<(usize, f64)> = before.iter().map(|&(x, p)| (x, theta * p)).collect();
        let mut checks = vec![
            Check::exact("branch", 0.0, wrong_branch as f64, wrong_branch == 0),
            Check::exact("structure", 0.0, malformed as f64, malformed == 0),
            Check::exact("latent_size", 0.0, wrong_size as f64, wrong_size == 0),
            Check::exact("discard_law", 0.0, bad_counter as f64, bad_counter == 0),
        ];
        checks.extend(frequency_checks(&counts, &expected, trials));
        let pass = checks.iter().all(|c| c.pass);
        cases.push(BranchCase {
            name: input.name.to_string(),
            operation: "downsample",
            branch: format!("{:?}", input.branch),
            checks,
            pass,
        });
    }

    for (k, input) in UNION_CASES.iter().enumerate() {
        let mut rng = SeededRng::new(derive_seed(seed, 1000 + k as u64));
        let (left, mut expected) = build(0, input.left.0, input.left.1, input.left.2);
        let (right, right_probs) = build(left.stored(), input.right.0, input.right.1, input.right.2);
        expected.extend(right_probs);
        let want_size = input.left.2 + input.right.2;
        let mut counts = vec![0u64; expected.len()];
        let (mut malformed, mut wrong_case, mut wrong_size) = (0u64, 0u64, 0u64);
        for _ in 0..trials {
            let mut l = left.clone();
            let case = l.absorb(right.clone(), &mut rng);
            if case != input.case {
                wrong_case += 1;
            } else if !union_hit.contains(&case) {
                union_hit.push(case);
            }
            malformed += u64::from(l.check_structure().is_err() || !l.is_distinct());
            wrong_size += u64::from((l.latent_size() - want_size).abs() > 1e-12);
            for &x in l.output_iter(&mut rng) {
                counts[x] += 1;
            }
        }
        let mut checks = vec![
            Check::exact("case", 0.0, wrong_case as f64, wrong_case == 0),
            Check::exact("structure", 0.0, malformed as f64, malformed == 0),
            Check::exact("latent_size", 0.0, wrong_size as f64, wrong_size == 0),
        ];
        checks.extend(frequency_checks(&counts, &expected, trials));
        let pass = checks.iter().all(|c| c.pass);
        cases.push(BranchCase {
            name: input.name.to_string(),
            operation: "union",
            branch: format!("{:?}", input.case),
            checks,
            pass,
        });
    }

    let mut report = BranchCoverageReport {
        version: super::REPORT_VERSION,
        trials,
        pass: false,
        cases,
        downsample_branches_hit: downsample_hit,
        union_cases_hit: union_hit,
    };
    report.pass = report.cases.iter().all(|c| c.pass) && report.covers_everything();
    report
}
