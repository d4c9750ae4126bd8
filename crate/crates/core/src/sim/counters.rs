//! Integer tallies of decision records. Merging is plain addition, so the
//! result does not depend on how trials were split across workers.

use crate::curve::{Rate, RatePoint};
use crate::detect::{DecisionRecord, FusionRule, Hypothesis, Occupant, SubTest};

/// Tallies for one test.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TestCounts {
    /// Alice slots seen by this test.
    pub alice: u64,
    /// Alice slots rejected.
    pub fa: u64,
    /// Eve slots seen.
    pub eve: u64,
    /// Eve slots accepted.
    pub md: u64,
    /// Slots entering the misclassification rate.
    pub mc_n: u64,
    /// Of those, identified as the wrong node.
    pub mc_wrong: u64,
}

impl TestCounts {
    fn decision(&mut self, truth: Occupant, d: Hypothesis) {
        match truth {
            Occupant::Alice(_) => {
                self.alice += 1;
                self.fa += u64::from(!d.is_h0());
            }
            Occupant::Eve => {
                self.eve += 1;
                self.md += u64::from(d.is_h0());
            }
        }
    }

    fn index(&mut self, truth: Occupant, idx: usize) {
        if let Occupant::Alice(i) = truth {
            self.mc_n += 1;
            self.mc_wrong += u64::from(idx != i);
        }
    }

    fn sub_test(&mut self, truth: Occupant, t: &SubTest) {
        self.decision(truth, t.decision);
        self.index(truth, t.index);
    }

    pub fn merge(&mut self, o: &TestCounts) {
        self.alice += o.alice;
        self.fa += o.fa;
        self.eve += o.eve;
        self.md += o.md;
        self.mc_n += o.mc_n;
        self.mc_wrong += o.mc_wrong;
    }

    /// Rates with Wald intervals; a rate with no eligible slot is absent.
    pub fn rate_point(&self, snr_db: f64, n_trials: u64, flags: u64, with_fa_md: bool) -> RatePoint {
        let mut p = RatePoint::empty(snr_db);
        if with_fa_md {
            p.p_fa = Rate::empirical(self.fa, self.alice);
            p.p_md = Rate::empirical(self.md, self.eve);
        }
        p.p_mc = Rate::empirical(self.mc_wrong, self.mc_n);
        p.n_trials = Some(n_trials);
        p.flags = flags;
        p
    }
}

/// All tallies at one SNR point.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PointCounters {
    pub n: u64,
    /// Clamped distance estimates.
    pub flags: u64,
    /// Trials whose simulation returned an error. They are excluded from
    /// every rate and reported here.
    pub errors: u64,
    /// Slots where `H0(AND) ⊆ H0(MV) ⊆ H0(OR)` failed.
    pub inclusion_violations: u64,
    /// Slots whose inclusion check ran (full mode).
    pub inclusion_checked: u64,
    pub step1: TestCounts,
    pub position: TestCounts,
    pub distance: TestCounts,
    pub aoa: TestCounts,
    /// Step 2 under AND, OR, MV.
    pub fusion: [TestCounts; 3],
    pub final_decision: TestCounts,
    /// Identification error among accepted Alice slots.
    pub identification: TestCounts,
}

impl PointCounters {
    pub fn add(&mut self, r: &DecisionRecord, flagged: bool) {
        self.n += 1;
        self.flags += u64::from(flagged);
        let t = r.truth;
        self.step1.decision(t, r.step1);
        self.distance.sub_test(t, &r.distance);
        if let Some(p) = &r.position {
            self.position.sub_test(t, p);
        }
        if let Some(a) = &r.aoa {
            self.aoa.sub_test(t, a);
        }
        if let Some(f) = &r.fused {
            self.inclusion_checked += 1;
            self.inclusion_violations += u64::from(!f.inclusions_hold());
            for (k, rule) in FusionRule::ALL.iter().enumerate() {
                self.fusion[k].decision(t, f.get(*rule));
            }
        }
        self.final_decision.decision(t, r.final_decision);
        if let Some(i) = r.identified {
            self.identification.index(t, i);
        }
    }

    pub fn add_error(&mut self) {
        self.n += 1;
        self.errors += 1;
    }

    pub fn merge(&mut self, o: &PointCounters) {
        self.n += o.n;
        self.flags += o.flags;
        self.errors += o.errors;
        self.inclusion_violations += o.inclusion_violations;
        self.inclusion_checked += o.inclusion_checked;
        self.step1.merge(&o.step1);
        self.position.merge(&o.position);
        self.distance.merge(&o.distance);
        self.aoa.merge(&o.aoa);
        for k in 0..3 {
            self.fusion[k].merge(&o.fusion[k]);
        }
        self.final_decision.merge(&o.final_decision);
        self.identification.merge(&o.identification);
    }

    /// Final-decision `P_fa`, `P_md` and identification `P_mc`.
    pub fn final_point(&self, snr_db: f64) -> RatePoint {
        let mut p = self.final_decision.rate_point(snr_db, self.n, self.flags + self.errors, true);
        p.p_mc = Rate::empirical(self.identification.mc_wrong, self.identification.mc_n);
        p
    }
}

/// Final-decision rates of a batch: `P_fa` over Alice slots, `P_md` over Eve
/// slots and `P_mc` over accepted Alice slots.
pub fn estimate_rates(records: &[DecisionRecord], snr_db: f64) -> RatePoint {
    let mut c = PointCounters::default();
    for r in records {
        c.add(r, false);
    }
    c.final_point(snr_db)
}
