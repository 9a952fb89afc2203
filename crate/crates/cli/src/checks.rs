//! Named tolerance checks behind `hpexp check` and `hpexp report`.

use hpexp::asymptotics::{self, compare, log_log_slope, Regime, Target};
use hpexp::curves::{ArcLabel, Geometry, Region};
use hpexp::potentials::{self, Measure};
use hpexp::surface::{self, Cut};
use hpexp::Complex64 as C;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum CheckName {
    Identities,
    Masses,
    Asymptotics,
    Airy,
}

impl CheckName {
    pub const ALL: [CheckName; 4] = [CheckName::Identities, CheckName::Masses, CheckName::Asymptotics, CheckName::Airy];
}

pub struct CheckSettings {
    pub precision_bits: usize,
    pub tolerance: f64,
    pub per_region: usize,
    pub seed: u64,
}

/// Outcome of one check: every measured item, and the subset that failed.
pub struct CheckReport {
    pub name: &'static str,
    pub items: Vec<Value>,
    pub failures: Vec<Value>,
}

impl CheckReport {
    fn new(name: &'static str) -> Self {
        CheckReport { name, items: Vec::new(), failures: Vec::new() }
    }

    fn record(&mut self, ok: bool, item: Value) {
        if !ok {
            self.failures.push(item.clone());
        }
        self.items.push(item);
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({ "check": self.name, "passed": self.passed(), "failures": self.failures, "items": self.items })
    }
}

pub fn run(check: CheckName, geom: &Geometry, settings: &CheckSettings) -> CheckReport {
    match check {
        CheckName::Identities => identities(geom, settings),
        CheckName::Masses => masses(geom),
        CheckName::Asymptotics => rates(geom, settings.precision_bits.max(256)),
        CheckName::Airy => airy(geom, settings.precision_bits.max(256)),
    }
}

const REGIONS: [Region; 6] = [Region::DP, Region::DR, Region::DInfP, Region::DInfR, Region::DInfU, Region::DInfL];

/// Seeded rejection sampling of `[-2.5, 2.5]²`, `per_region` points in each
/// region and at least 0.02 from every curve.
pub fn region_samples(geom: &Geometry, per_region: usize, seed: u64) -> Vec<(Region, C)> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut counts = [0usize; 6];
    let mut out = Vec::new();
    let mut tries = 0usize;
    while counts.iter().any(|&k| k < per_region) && tries < 200_000 * per_region.max(1) {
        tries += 1;
        let z = C::new(rng.gen_range(-2.5..2.5), rng.gen_range(-2.5..2.5));
        if z.norm() < 0.02 || geom.distance_to_curves(z) < 0.02 {
            continue;
        }
        let Some(region) = geom.classify(z).region() else { continue };
        let slot = REGIONS.iter().position(|&r| r == region).expect("six regions");
        if counts[slot] < per_region {
            counts[slot] += 1;
            out.push((region, z));
        }
    }
    out
}

fn identities(geom: &Geometry, s: &CheckSettings) -> CheckReport {
    let mut rep = CheckReport::new("identities");
    let samples = region_samples(geom, s.per_region, s.seed);
    let results: Vec<_> = samples.par_iter().map(|&(region, z)| (region, z, potentials::identity_residuals(geom, z))).collect();
    for (region, z, res) in results {
        match res {
            Ok(r) => {
                let worst = r.worst();
                rep.record(worst <= s.tolerance, json!({ "region": format!("{region:?}"), "z": [z.re, z.im], "worst": worst, "tolerance": s.tolerance }));
            }
            Err(e) => rep.record(false, json!({ "region": format!("{region:?}"), "z": [z.re, z.im], "error": e.to_string() })),
        }
    }
    let short = REGIONS.len() * s.per_region - samples.len();
    if short > 0 {
        rep.record(false, json!({ "error": format!("sampling left {short} region slots empty") }));
    }
    rep
}

fn masses(geom: &Geometry) -> CheckReport {
    const TOL: f64 = 1e-8;
    let mut rep = CheckReport::new("masses");
    let cases = [
        ("mu_P", potentials::mu_total_mass(geom, Measure::P), 1.0),
        ("mu_Q", potentials::mu_total_mass(geom, Measure::Q), 1.0),
        ("mu_R", potentials::mu_total_mass(geom, Measure::R), 1.0),
        ("gammaPstar", potentials::star_mass(geom, Cut::P), 2.0),
        ("gammaRstar", potentials::star_mass(geom, Cut::R), 2.0),
    ];
    for (name, mass, expected) in cases {
        match mass {
            Ok(m) => {
                let ok = (m.value - expected).abs() <= TOL && m.imaginary.abs() <= TOL;
                rep.record(ok, json!({ "measure": name, "expected": expected, "value": m.value, "imaginary": m.imaginary, "error_estimate": m.error_estimate, "tolerance": TOL }));
            }
            Err(e) => rep.record(false, json!({ "measure": name, "error": e.to_string() })),
        }
    }
    for label in [ArcLabel::GammaE1, ArcLabel::GammaE2, ArcLabel::GammaE3, ArcLabel::GammaE4] {
        let arc = geom.arc(label);
        let mut lowest = f64::INFINITY;
        let mut error = None;
        // The first node sits at the branch point, where the density vanishes.
        for node in &arc.nodes[1..] {
            match potentials::mu_density(geom, node.z, label) {
                Ok(sample) => lowest = lowest.min(sample.line_density().re),
                Err(e) => error = Some(e.to_string()),
            }
        }
        let ok = error.is_none() && lowest >= -1e-10;
        rep.record(ok, json!({ "measure": "mu_E", "carrier": label.name(), "min_line_density": lowest, "error": error }));
    }
    rep
}

/// Interior points where each target's strong formula applies.
pub const RATE_CASES: [(Target, f64, f64); 10] = [
    (Target::P, 2.0, 0.0),
    (Target::P, -0.5, 0.0),
    (Target::P, 0.0, 1.2),
    (Target::Q, 2.0, 1.0),
    (Target::Q, 0.5, 0.0),
    (Target::R, -2.0, -1.0),
    (Target::R, 0.5, 0.0),
    (Target::E, 2.0, 1.0),
    (Target::E, -0.3, 0.0),
    (Target::E, 0.0, 1.2),
];

pub const RATE_NS: [usize; 4] = [16, 24, 32, 40];

fn rates(geom: &Geometry, bits: usize) -> CheckReport {
    let mut rep = CheckReport::new("asymptotics");
    let jobs: Vec<(usize, usize)> = (0..RATE_CASES.len()).flat_map(|c| (0..RATE_NS.len()).map(move |k| (c, k))).collect();
    let errs: Vec<Result<f64, String>> = jobs
        .par_iter()
        .map(|&(c, k)| {
            let (t, re, im) = RATE_CASES[c];
            compare(geom, C::new(re, im), RATE_NS[k], t, Regime::Strong, bits).map(|row| row.rel_err).map_err(|e| e.to_string())
        })
        .collect();
    for (c, &(t, re, im)) in RATE_CASES.iter().enumerate() {
        let row: Result<Vec<f64>, String> = errs[c * RATE_NS.len()..(c + 1) * RATE_NS.len()].iter().cloned().collect();
        match row {
            Ok(e) => {
                let slope = log_log_slope(&RATE_NS, &e);
                rep.record((-1.5..=-0.6).contains(&slope), json!({ "target": t.name(), "z": [re, im], "n": RATE_NS, "rel_err": e, "slope": slope, "range": [-1.5, -0.6] }));
            }
            Err(e) => rep.record(false, json!({ "target": t.name(), "z": [re, im], "error": e })),
        }
    }
    rep
}

fn airy(geom: &Geometry, bits: usize) -> CheckReport {
    let mut rep = CheckReport::new("airy");
    let z1 = surface::branch_points().z[0];
    let points: Vec<C> = (0..8).map(|k| z1 + C::from_polar(0.05, std::f64::consts::TAU * (k as f64 + 0.3) / 8.0)).collect();
    let rows: Vec<_> = points.par_iter().map(|&z| (z, compare(geom, z, 30, Target::P, Regime::AiryLocal, bits))).collect();
    for (z, row) in rows {
        match row {
            Ok(r) => rep.record(r.rel_err <= 0.2, json!({ "target": "P", "n": 30, "z": [z.re, z.im], "rel_err": r.rel_err, "tolerance": 0.2 })),
            Err(e) => rep.record(false, json!({ "z": [z.re, z.im], "error": e.to_string() })),
        }
    }
    // f_1'(z_1) by the trapezoid rule for the Cauchy integral on a small circle.
    let count = 128;
    let radius = 0.02;
    let sum: Result<Vec<C>, _> = (0..count)
        .into_par_iter()
        .map(|k| {
            let z = z1 + C::from_polar(radius, std::f64::consts::TAU * (k as f64 + 0.3) / count as f64);
            asymptotics::airy_local_data(geom, z, asymptotics::AIRY_DELTA).map(|d| d.f1 / (z - z1))
        })
        .collect();
    match sum {
        Ok(v) => {
            let derivative = v.iter().sum::<C>() / count as f64;
            let gap = (derivative - asymptotics::c1()).norm();
            rep.record(gap <= 1e-10, json!({ "quantity": "f1'(z1)", "value": [derivative.re, derivative.im], "closed_form": [asymptotics::c1().re, asymptotics::c1().im], "gap": gap, "tolerance": 1e-10 }));
        }
        Err(e) => rep.record(false, json!({ "quantity": "f1'(z1)", "error": e.to_string() })),
    }
    rep
}
