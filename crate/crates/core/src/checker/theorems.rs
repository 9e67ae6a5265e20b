//! Bounded analogues of the closure theorems for the J-Armendariz property.
//!
//! Each statement is checked by running exhaustive JAC classification on
//! every ring it mentions at the same bounds.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{classify, Bounds, ClassificationReport, SearchConfig, SearchMode, TargetKind};
use crate::constructions::{
    corner, direct_product, ideal_closure, quotient, trivial_extension, triangular,
    upper_triangular, BimoduleTriangularSpec, IdealSpec,
};
use crate::error::Result;
use crate::ring::{Elem, FiniteRing};
use crate::structure::{is_abelian, is_local, jacobson_radical, Abelian};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TheoremId {
    #[serde(rename = "V-QUOT")]
    Quot,
    #[serde(rename = "V-LOCAL")]
    Local,
    #[serde(rename = "V-PROD")]
    Prod,
    #[serde(rename = "V-TRI")]
    Tri,
    #[serde(rename = "V-TN")]
    Tn,
    #[serde(rename = "V-TRIV")]
    Triv,
    #[serde(rename = "V-CORNER")]
    Corner,
}

impl TheoremId {
    pub const ALL: [TheoremId; 7] = [
        TheoremId::Quot,
        TheoremId::Local,
        TheoremId::Prod,
        TheoremId::Tri,
        TheoremId::Tn,
        TheoremId::Triv,
        TheoremId::Corner,
    ];

    pub fn code(self) -> &'static str {
        match self {
            TheoremId::Quot => "V-QUOT",
            TheoremId::Local => "V-LOCAL",
            TheoremId::Prod => "V-PROD",
            TheoremId::Tri => "V-TRI",
            TheoremId::Tn => "V-TN",
            TheoremId::Triv => "V-TRIV",
            TheoremId::Corner => "V-CORNER",
        }
    }
}

#[derive(Clone, Debug)]
pub enum TheoremInstance {
    /// `I ⊆ J(R)` and `R/I` J-Armendariz imply `R` J-Armendariz.
    Quot { ring: FiniteRing, ideal: IdealSpec },
    /// Local rings are J-Armendariz.
    Local { ring: FiniteRing },
    /// `R × S` is J-Armendariz iff both factors are.
    Prod { left: FiniteRing, right: FiniteRing },
    /// The triangular ring over `R` (with `M = R`) is J-Armendariz iff `R` is.
    Tri { base: FiniteRing },
    /// `T_n(R)` is J-Armendariz iff `R` is.
    Tn { base: FiniteRing, n: usize },
    /// `T(R, R)` is J-Armendariz iff `R` is.
    Triv { base: FiniteRing },
    /// `R` J-Armendariz implies `eRe` J-Armendariz; the converse is checked
    /// only for abelian `R`.
    Corner { ring: FiniteRing, idempotent: Elem },
}

impl TheoremInstance {
    pub fn id(&self) -> TheoremId {
        match self {
            TheoremInstance::Quot { .. } => TheoremId::Quot,
            TheoremInstance::Local { .. } => TheoremId::Local,
            TheoremInstance::Prod { .. } => TheoremId::Prod,
            TheoremInstance::Tri { .. } => TheoremId::Tri,
            TheoremInstance::Tn { .. } => TheoremId::Tn,
            TheoremInstance::Triv { .. } => TheoremId::Triv,
            TheoremInstance::Corner { .. } => TheoremId::Corner,
        }
    }

    fn describe(&self) -> Vec<String> {
        match self {
            TheoremInstance::Quot { ring, ideal } => {
                let gens: Vec<String> = ideal.generators.iter().map(|g| ring.label(g)).collect();
                vec![ring.name().to_string(), format!("ideal<{}>", gens.join(","))]
            }
            TheoremInstance::Local { ring } => vec![ring.name().to_string()],
            TheoremInstance::Prod { left, right } => {
                vec![left.name().to_string(), right.name().to_string()]
            }
            TheoremInstance::Tri { base } | TheoremInstance::Triv { base } => {
                vec![base.name().to_string()]
            }
            TheoremInstance::Tn { base, n } => vec![base.name().to_string(), format!("n={n}")],
            TheoremInstance::Corner { ring, idempotent } => {
                vec![ring.name().to_string(), format!("e={}", ring.label(idempotent))]
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Holds,
    /// No checked implication had a true premise.
    HoldsVacuously,
    Fails,
}

#[derive(Clone, Debug, Serialize)]
pub struct TheoremVerdict {
    pub theorem: TheoremId,
    pub instance: Vec<String>,
    pub bounds: Bounds,
    pub outcome: Outcome,
    pub holds: bool,
    pub notes: Vec<String>,
    pub reports: Vec<ClassificationReport>,
    /// The report refuting the statement, which revalidates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<ClassificationReport>,
}

/// Runs validators with a shared memo of JAC classifications keyed by ring
/// name and bounds.
pub struct Validator {
    config: SearchConfig,
    cap: usize,
    memo: Mutex<HashMap<(String, Bounds), ClassificationReport>>,
}

struct Tally {
    notes: Vec<String>,
    reports: Vec<ClassificationReport>,
    premise_seen: bool,
    failure: Option<ClassificationReport>,
}

impl Tally {
    fn new() -> Self {
        Tally { notes: Vec::new(), reports: Vec::new(), premise_seen: false, failure: None }
    }

    /// Records `premise ⇒ conclusion`; `refuter` is the report to cite when it
    /// fails.
    fn implication(&mut self, what: &str, premise: bool, conclusion: bool, refuter: &ClassificationReport) {
        if !premise {
            self.notes.push(format!("{what}: premise false"));
            return;
        }
        self.premise_seen = true;
        if conclusion {
            self.notes.push(format!("{what}: holds"));
        } else {
            self.notes.push(format!("{what}: FAILS"));
            self.failure.get_or_insert_with(|| refuter.clone());
        }
    }

    fn equivalence(
        &mut self,
        what: &str,
        lhs: bool,
        rhs: bool,
        lhs_refuter: &ClassificationReport,
        rhs_refuter: &ClassificationReport,
    ) {
        self.premise_seen = true;
        if lhs == rhs {
            self.notes.push(format!("{what}: both sides {}", if lhs { "verified" } else { "refuted" }));
        } else {
            self.notes.push(format!("{what}: FAILS"));
            let refuter = if lhs { rhs_refuter } else { lhs_refuter };
            self.failure.get_or_insert_with(|| refuter.clone());
        }
    }
}

impl Validator {
    pub fn new(config: SearchConfig, cap: usize) -> Self {
        Validator { config, cap, memo: Mutex::new(HashMap::new()) }
    }

    /// Exhaustive JAC classification, memoized by ring name.
    pub fn classify_jac(&self, ring: &FiniteRing, bounds: Bounds) -> Result<ClassificationReport> {
        let key = (ring.name().to_string(), bounds);
        if let Some(r) = self.memo.lock().unwrap().get(&key) {
            return Ok(r.clone());
        }
        let report = classify(ring, TargetKind::Jac, bounds, SearchMode::Exhaustive, &self.config)?;
        self.memo.lock().unwrap().insert(key, report.clone());
        Ok(report)
    }

    fn run(&self, tally: &mut Tally, ring: &FiniteRing, bounds: Bounds) -> Result<ClassificationReport> {
        let r = self.classify_jac(ring, bounds)?;
        tally.reports.push(r.clone());
        Ok(r)
    }

    pub fn validate(&self, instance: &TheoremInstance, bounds: Bounds) -> Result<TheoremVerdict> {
        let mut tally = Tally::new();
        match instance {
            TheoremInstance::Quot { ring, ideal } => {
                let radical = jacobson_radical(ring)?;
                let members = ideal_closure(ring, &ideal.generators)?;
                if members.iter().all(|&i| radical.contains(i)) {
                    let q = quotient(ring, ideal)?;
                    let rq = self.run(&mut tally, &q, bounds)?;
                    let r = self.run(&mut tally, ring, bounds)?;
                    tally.implication("R/I verified => R verified", rq.is_verified(), r.is_verified(), &r);
                } else {
                    tally.notes.push("I is not contained in J(R)".into());
                }
            }
            TheoremInstance::Local { ring } => {
                if is_local(ring)? {
                    let r = self.run(&mut tally, ring, bounds)?;
                    tally.implication("local => verified", true, r.is_verified(), &r);
                } else {
                    tally.notes.push("ring is not local".into());
                }
            }
            TheoremInstance::Prod { left, right } => {
                let product = direct_product(left, right)?.materialize(self.cap)?;
                let rl = self.run(&mut tally, left, bounds)?;
                let rr = self.run(&mut tally, right, bounds)?;
                let rp = self.run(&mut tally, &product, bounds)?;
                let factor_refuter = if rl.is_verified() { &rr } else { &rl };
                tally.equivalence(
                    "factors verified <=> product verified",
                    rl.is_verified() && rr.is_verified(),
                    rp.is_verified(),
                    factor_refuter,
                    &rp,
                );
            }
            TheoremInstance::Tri { base } => {
                let t = triangular(&BimoduleTriangularSpec::same_ring(base))?.materialize(self.cap)?;
                self.equivalent_extension(&mut tally, base, &t, bounds, "R verified <=> tri(R) verified")?;
            }
            TheoremInstance::Tn { base, n } => {
                let t = upper_triangular(*n, base)?.materialize(self.cap)?;
                self.equivalent_extension(&mut tally, base, &t, bounds, "R verified <=> T_n(R) verified")?;
            }
            TheoremInstance::Triv { base } => {
                let t = trivial_extension(base)?.materialize(self.cap)?;
                self.equivalent_extension(&mut tally, base, &t, bounds, "R verified <=> T(R,R) verified")?;
            }
            TheoremInstance::Corner { ring, idempotent } => {
                let c = corner(ring, idempotent)?;
                let r = self.run(&mut tally, ring, bounds)?;
                let rc = self.run(&mut tally, &c, bounds)?;
                tally.implication("R verified => eRe verified", r.is_verified(), rc.is_verified(), &rc);
                match is_abelian(ring)? {
                    Abelian::Abelian => tally.implication(
                        "eRe verified => R verified (abelian R)",
                        rc.is_verified(),
                        r.is_verified(),
                        &r,
                    ),
                    Abelian::Witness { .. } => tally.notes.push("converse skipped: R is not abelian".into()),
                }
            }
        }
        let outcome = if tally.failure.is_some() {
            Outcome::Fails
        } else if tally.premise_seen {
            Outcome::Holds
        } else {
            Outcome::HoldsVacuously
        };
        Ok(TheoremVerdict {
            theorem: instance.id(),
            instance: instance.describe(),
            bounds,
            outcome,
            holds: outcome != Outcome::Fails,
            notes: tally.notes,
            reports: tally.reports,
            counterexample: tally.failure,
        })
    }

    fn equivalent_extension(
        &self,
        tally: &mut Tally,
        base: &FiniteRing,
        extended: &FiniteRing,
        bounds: Bounds,
        what: &str,
    ) -> Result<()> {
        let rb = self.run(tally, base, bounds)?;
        let re = self.run(tally, extended, bounds)?;
        tally.equivalence(what, rb.is_verified(), re.is_verified(), &rb, &re);
        Ok(())
    }
}

pub fn validate_theorem(
    instance: &TheoremInstance,
    bounds: Bounds,
    config: &SearchConfig,
    cap: usize,
) -> Result<TheoremVerdict> {
    Validator::new(*config, cap).validate(instance, bounds)
}

/// Rings that are weak Armendariz but not J-Armendariz at the given bounds.
/// The implication between the two properties is not assumed anywhere; this
/// looks for an empirical counterexample to it.
pub fn nil_but_not_jac(
    rings: &[FiniteRing],
    bounds: Bounds,
    config: &SearchConfig,
) -> Result<Vec<(ClassificationReport, ClassificationReport)>> {
    let mut out = Vec::new();
    for ring in rings {
        let nil = classify(ring, TargetKind::Nil, bounds, SearchMode::Exhaustive, config)?;
        if !nil.is_verified() {
            continue;
        }
        let jac = classify(ring, TargetKind::Jac, bounds, SearchMode::Exhaustive, config)?;
        if jac.verdict == super::Verdict::Counterexample {
            out.push((nil, jac));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{gf, matrix_ring, zmod};
    use crate::testutil::at;

    fn config() -> SearchConfig {
        SearchConfig::default().with_workers(1)
    }

    #[test]
    fn product_of_small_rings() {
        let inst = TheoremInstance::Prod { left: zmod(4).unwrap(), right: gf(2, 1).unwrap() };
        let v = validate_theorem(&inst, Bounds::new(1, 1), &config(), 4096).unwrap();
        assert_eq!(v.outcome, Outcome::Holds);
        assert_eq!(v.reports.len(), 3);
        assert!(v.reports.iter().all(|r| r.is_verified()));
    }

    #[test]
    fn local_ring() {
        let v = validate_theorem(&TheoremInstance::Local { ring: zmod(4).unwrap() }, Bounds::new(2, 2), &config(), 4096)
            .unwrap();
        assert_eq!(v.outcome, Outcome::Holds);
        let v = validate_theorem(&TheoremInstance::Local { ring: zmod(6).unwrap() }, Bounds::new(2, 2), &config(), 4096)
            .unwrap();
        assert_eq!(v.outcome, Outcome::HoldsVacuously);
    }

    #[test]
    fn upper_triangular_over_f2() {
        let inst = TheoremInstance::Tn { base: gf(2, 1).unwrap(), n: 2 };
        let v = validate_theorem(&inst, Bounds::new(2, 2), &config(), 4096).unwrap();
        assert_eq!(v.outcome, Outcome::Holds);
        assert!(v.holds);
    }

    #[test]
    fn corner_of_matrix_ring() {
        let r = matrix_ring(2, &gf(2, 1).unwrap()).unwrap().materialize(64).unwrap();
        let e = r.element(at(&r, "[[1,0],[0,0]]")).unwrap();
        let v = validate_theorem(&TheoremInstance::Corner { ring: r, idempotent: e }, Bounds::new(1, 1), &config(), 4096)
            .unwrap();
        assert_eq!(v.outcome, Outcome::HoldsVacuously);
        assert!(v.notes.iter().any(|n| n.contains("not abelian")));
    }

    #[test]
    fn quotient_outside_radical_is_vacuous() {
        let z6 = zmod(6).unwrap();
        let ideal = IdealSpec { generators: vec![z6.element(2).unwrap()] };
        let v = validate_theorem(&TheoremInstance::Quot { ring: z6, ideal }, Bounds::new(1, 1), &config(), 4096).unwrap();
        assert_eq!(v.outcome, Outcome::HoldsVacuously);
        let z8 = zmod(8).unwrap();
        let ideal = IdealSpec { generators: vec![z8.element(4).unwrap()] };
        let v = validate_theorem(&TheoremInstance::Quot { ring: z8, ideal }, Bounds::new(1, 1), &config(), 4096).unwrap();
        assert_eq!(v.outcome, Outcome::Holds);
    }

    #[test]
    fn trivial_extension_and_triangular() {
        for inst in [TheoremInstance::Triv { base: zmod(4).unwrap() }, TheoremInstance::Tri { base: zmod(2).unwrap() }] {
            let v = validate_theorem(&inst, Bounds::new(1, 1), &config(), 4096).unwrap();
            assert_eq!(v.outcome, Outcome::Holds, "{:?}", v.notes);
        }
    }

    #[test]
    fn memo_reuses_reports() {
        let validator = Validator::new(config(), 4096);
        let r = zmod(4).unwrap();
        let a = validator.classify_jac(&r, Bounds::new(1, 1)).unwrap();
        let b = validator.classify_jac(&r, Bounds::new(1, 1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn nil_versus_jac_search_runs() {
        let rings = [zmod(4).unwrap(), gf(2, 2).unwrap()];
        assert!(nil_but_not_jac(&rings, Bounds::new(1, 1), &config()).unwrap().is_empty());
    }
}
