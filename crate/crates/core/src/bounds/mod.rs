//! Exact-versus-analytic checks of the error bounds.
//!
//! Every case pairs a brute-force quantity (lattice sums, exact outcome
//! distributions) with the printed bound at the same point. A case whose
//! lemma preconditions fail is reported as not applicable and never counted
//! as a pass.

mod checks;
mod grid;

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use checks::*;
pub use grid::{default_grid, run_grid, GridSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Kind {
    NormUp,
    NormLow,
    InvNorm,
    TailG0F0,
    ContaminationR,
    ContaminationL,
    HitRate,
    HitRateCorollary,
    AliasingM,
    DiscErrorM,
    HmFmWindow,
    TruncPolutM,
    EpsNormM,
    TotalEpsM,
    QRequirement,
    FailRateComponents,
}

impl Kind {
    pub const ALL: [Kind; 16] = [
        Kind::NormUp,
        Kind::NormLow,
        Kind::InvNorm,
        Kind::TailG0F0,
        Kind::ContaminationR,
        Kind::ContaminationL,
        Kind::HitRate,
        Kind::HitRateCorollary,
        Kind::AliasingM,
        Kind::DiscErrorM,
        Kind::HmFmWindow,
        Kind::TruncPolutM,
        Kind::EpsNormM,
        Kind::TotalEpsM,
        Kind::QRequirement,
        Kind::FailRateComponents,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::NormUp => "norm_up",
            Kind::NormLow => "norm_low",
            Kind::InvNorm => "inv_norm",
            Kind::TailG0F0 => "tail_G0F0",
            Kind::ContaminationR => "contamination_R",
            Kind::ContaminationL => "contamination_L",
            Kind::HitRate => "hit_rate",
            Kind::HitRateCorollary => "hit_rate_corollary",
            Kind::AliasingM => "aliasing_m",
            Kind::DiscErrorM => "disc_error_m",
            Kind::HmFmWindow => "HmFm_window",
            Kind::TruncPolutM => "trunc_polut_m",
            Kind::EpsNormM => "eps_norm_m",
            Kind::TotalEpsM => "total_eps_m",
            Kind::QRequirement => "q_requirement",
            Kind::FailRateComponents => "fail_rate_components",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    /// exact <= bound
    Upper,
    /// exact >= bound
    Lower,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scale {
    Linear,
    /// exact and bound are natural logs
    Ln,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

/// Evaluation point. Widths and offsets are in bins; unused fields are NaN or 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub label: String,
    pub eta: f64,
    pub ln_inv_delta: f64,
    pub gap: f64,
    pub m: u32,
    pub q: u32,
    pub sigma: f64,
    pub k: i64,
    pub m0: u64,
    pub mu_tilde: f64,
    pub x0: f64,
    /// Contaminant offset in bins.
    pub d_bins: f64,
}

impl Point {
    pub fn n(&self) -> f64 {
        (self.q as f64).exp2()
    }

    pub fn sigma_tilde(&self) -> f64 {
        self.sigma / self.n()
    }

    pub fn with_mu(&self, mu_tilde: f64) -> Self {
        Self {
            mu_tilde,
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCase {
    pub kind: Kind,
    pub variant: String,
    pub point: Point,
    pub exact: f64,
    pub bound: f64,
    pub sense: Sense,
    pub scale: Scale,
    pub preconditions_met: bool,
    /// Comparison slack: tol_rel * |bound| + tol_abs.
    pub tol_rel: f64,
    pub tol_abs: f64,
    /// The printed constant the bound uses.
    pub constant: String,
}

pub const TOL_LATTICE: f64 = 1e-13;
pub const TOL_SIM: f64 = 1e-12;
pub const TOL_LN: f64 = 1e-12;

impl BoundCase {
    pub fn tolerance(&self) -> f64 {
        self.tol_rel * self.bound.abs() + self.tol_abs
    }

    /// Signed slack: positive when the bound holds.
    pub fn margin(&self) -> f64 {
        match self.sense {
            Sense::Upper => self.bound - self.exact,
            Sense::Lower => self.exact - self.bound,
        }
    }

    pub fn holds(&self) -> bool {
        let slack = self.tolerance();
        match self.sense {
            Sense::Upper => self.exact <= self.bound + slack || (self.exact == f64::NEG_INFINITY),
            Sense::Lower => self.exact >= self.bound - slack || (self.bound == f64::NEG_INFINITY),
        }
    }

    pub fn status(&self) -> Status {
        if !self.preconditions_met {
            Status::NotApplicable
        } else if self.holds() {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// Builder shorthand used by the checks.
pub(crate) struct CaseBuilder<'a> {
    pub kind: Kind,
    pub point: &'a Point,
}

impl CaseBuilder<'_> {
    pub fn case(&self, variant: &str, constant: &str, exact: f64, bound: f64, pre: bool) -> BoundCase {
        BoundCase {
            kind: self.kind,
            variant: variant.into(),
            point: self.point.clone(),
            exact,
            bound,
            sense: Sense::Upper,
            scale: Scale::Linear,
            preconditions_met: pre,
            tol_rel: TOL_LATTICE,
            tol_abs: 0.0,
            constant: constant.into(),
        }
    }

    pub fn ln(&self, variant: &str, constant: &str, exact: f64, bound: f64, pre: bool) -> BoundCase {
        BoundCase {
            scale: Scale::Ln,
            tol_rel: 0.0,
            tol_abs: TOL_LN,
            ..self.case(variant, constant, exact, bound, pre)
        }
    }
}

pub(crate) fn lower(mut c: BoundCase) -> BoundCase {
    c.sense = Sense::Lower;
    c
}

pub(crate) fn with_tol(mut c: BoundCase, rel: f64, abs: f64) -> BoundCase {
    c.tol_rel = rel;
    c.tol_abs = abs;
    c
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub grid: String,
    pub cases: Vec<BoundCase>,
    /// Plan points that could not be planned, with the reason.
    pub skipped: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KindTally {
    pub pass: usize,
    pub fail: usize,
    pub not_applicable: usize,
}

impl BoundReport {
    pub fn failures(&self) -> Vec<&BoundCase> {
        self.cases.iter().filter(|c| c.status() == Status::Fail).collect()
    }

    pub fn tally(&self) -> BTreeMap<&'static str, KindTally> {
        let mut out: BTreeMap<&'static str, KindTally> =
            Kind::ALL.iter().map(|k| (k.name(), KindTally::default())).collect();
        for c in &self.cases {
            let t = out.get_mut(c.kind.name()).expect("known kind");
            match c.status() {
                Status::Pass => t.pass += 1,
                Status::Fail => t.fail += 1,
                Status::NotApplicable => t.not_applicable += 1,
            }
        }
        out
    }

    pub fn applicable(&self) -> usize {
        self.cases.iter().filter(|c| c.preconditions_met).count()
    }

    pub const CSV_HEADER: [&'static str; 23] = [
        "case",
        "variant",
        "label",
        "eta",
        "ln_inv_delta",
        "gap",
        "m",
        "q",
        "sigma",
        "K",
        "M0",
        "mu_tilde",
        "x0",
        "d_bins",
        "sense",
        "scale",
        "constant",
        "exact",
        "bound",
        "margin",
        "tolerance",
        "preconds",
        "status",
    ];

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(Self::CSV_HEADER)?;
        let f = |x: f64| format!("{x:.16e}");
        for c in &self.cases {
            let p = &c.point;
            out.write_record([
                c.kind.name().to_string(),
                c.variant.clone(),
                p.label.clone(),
                f(p.eta),
                f(p.ln_inv_delta),
                f(p.gap),
                p.m.to_string(),
                p.q.to_string(),
                f(p.sigma),
                p.k.to_string(),
                p.m0.to_string(),
                f(p.mu_tilde),
                f(p.x0),
                f(p.d_bins),
                format!("{:?}", c.sense).to_lowercase(),
                format!("{:?}", c.scale).to_lowercase(),
                c.constant.clone(),
                f(c.exact),
                f(c.bound),
                f(c.margin()),
                f(c.tolerance()),
                c.preconditions_met.to_string(),
                match c.status() {
                    Status::Pass => "pass",
                    Status::Fail => "FAIL",
                    Status::NotApplicable => "n/a",
                }
                .to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// One line per kind.
    pub fn summary(&self) -> String {
        let mut s = format!("grid: {}\n", self.grid);
        for (name, t) in self.tally() {
            s.push_str(&format!(
                "{name:<22} pass {:>5}  fail {:>3}  n/a {:>4}\n",
                t.pass, t.fail, t.not_applicable
            ));
        }
        s.push_str(&format!(
            "total {} cases, {} applicable, {} failures, {} skipped plan points\n",
            self.cases.len(),
            self.applicable(),
            self.failures().len(),
            self.skipped.len()
        ));
        s
    }
}
