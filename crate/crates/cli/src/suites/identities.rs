//! Criteria 1-3: identities that hold exactly on finite spaces.
//!
//! Residuals are relative to the sum of absolute values of the summands
//! involved, which is the scale of accumulated rounding error.

use bogo_core::calculus::lattice::{subset_zeta, superset_zeta};
use bogo_core::calculus::*;
use bogo_core::equilibrium::{bogoliubov_equation_residual, BogoliubovForm};
use bogo_core::rng::StreamRng;
use bogo_core::Complex64;
use rand::Rng;
use serde::Serialize;

use super::*;

const EXACT_INSTANCES: u64 = 200;
const EXACT_TOL: f64 = 1e-12;
const GNZ_INSTANCES: u64 = 50;
const GNZ_TOL: f64 = 1e-12;
const GNZ_CONTROL_FLOOR: f64 = 1e-6;
const BOGOLIUBOV_INSTANCES: u64 = 30;
const BOGOLIUBOV_TOL: f64 = 1e-10;

#[derive(Serialize)]
struct IdentityRow {
    identity: &'static str,
    instance: u64,
    sites: usize,
    relative_residual: f64,
}

type IdentityFn = fn(&mut StreamRng, usize) -> Result<f64, HarnessError>;

const IDENTITIES: [(&str, IdentityFn); 7] = [
    ("K/K^-1 roundtrip", k_roundtrip),
    ("K* duality", k_star_duality),
    ("star identity", star_identity),
    ("measure/correlation roundtrip", measure_roundtrip),
    ("derivative coefficients", derivative_coefficients),
    ("shift identities", shift_identities),
    ("occupation dual route", occupation_route),
];

pub(super) fn exact_suite(ctx: &SuiteContext) -> Result<Body, HarnessError> {
    let mut body = Body::default();
    let mut rows = Vec::new();
    for (part, (name, f)) in IDENTITIES.iter().enumerate() {
        let mut worst = 0.0f64;
        for inst in 0..EXACT_INSTANCES {
            let mut r = ctx.stream(1, part as u64, inst);
            // Sizes cycle through 1..=10 so every size is covered 20 times.
            let n = 1 + (inst % 10) as usize;
            let rel = f(&mut r, n)?;
            worst = worst.max(rel);
            rows.push(IdentityRow { identity: name, instance: inst, sites: n, relative_residual: rel });
        }
        body.check(Assertion::at_most(
            format!("{name}: max relative residual over {EXACT_INSTANCES} instances"),
            worst,
            ctx.tol(EXACT_TOL),
        ));
    }
    body.files.push(DataFile::csv("c1_identities.csv", &rows)?);
    Ok(body)
}

fn norms(values: &[Complex64]) -> Vec<Complex64> {
    values.iter().map(|v| c(v.norm())).collect()
}

/// Largest entrywise `|a - b| / scale`, where a zero scale means the entry
/// must match exactly.
fn max_scaled(a: &[Complex64], b: &[Complex64], scale: &[Complex64]) -> f64 {
    max_of(a.iter().zip(b).zip(scale).map(|((x, y), s)| {
        let d = (x - y).norm();
        if s.re > 0.0 {
            d / s.re
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }))
}

fn k_roundtrip(r: &mut StreamRng, n: usize) -> Result<f64, HarnessError> {
    let sp = random_space(r, n)?;
    let g = random_table(r, &sp, Role::QuasiObservable)?;
    let kg = k_transform_table(&g);
    let back = k_inverse(&kg);
    let mut scale = norms(kg.values());
    subset_zeta(&mut scale);
    let forward = max_scaled(back.values(), g.values(), &scale);

    let f = random_table(r, &sp, Role::Observable)?;
    let inv = k_inverse(&f);
    let again = k_transform_table(&inv);
    let mut scale = norms(inv.values());
    subset_zeta(&mut scale);
    Ok(forward.max(max_scaled(again.values(), f.values(), &scale)))
}

/// `sum_gamma (KG)(gamma) mu(gamma) = sum_eta G(eta) k(eta) lambda(eta)`.
fn k_star_duality(r: &mut StreamRng, n: usize) -> Result<f64, HarnessError> {
    let sp = random_space(r, n)?;
    let mu = random_measure(r, &sp)?;
    let g = random_table(r, &sp, Role::QuasiObservable)?;
    let kg = k_transform_table(&g);
    let k = correlation_from_measure(&mu)?;
    let lam = k.lambda_table();
    let lhs: Complex64 = kg.values().iter().zip(mu.values()).map(|(a, b)| a * b).sum();
    let rhs: Complex64 = g.values().iter().zip(k.values()).zip(&lam).map(|((a, b), l)| a * b * l).sum();
    let mag: f64 = g.values().iter().zip(k.values()).zip(&lam).map(|((a, b), l)| (a * b).norm() * l).sum::<f64>()
        + kg.values().iter().zip(mu.values()).map(|(a, b)| (a * b).norm()).sum::<f64>();
    Ok((lhs - rhs).norm() / mag)
}

fn star_identity(r: &mut StreamRng, n: usize) -> Result<f64, HarnessError> {
    let sp = random_space(r, n)?;
    let g = random_table(r, &sp, Role::QuasiObservable)?;
    let hs: Vec<Complex64> = (0..97).map(|_| random_complex(r)).collect();
    let res = star_identity_check(&g, |xi, eta| hs[(xi.bits() as usize * 13 + eta.bits() as usize * 7) % hs.len()]);
    Ok(res.relative())
}

/// `mu -> k -> mu` through the correlation transform and its inverse.
fn measure_roundtrip(r: &mut StreamRng, n: usize) -> Result<f64, HarnessError> {
    let sp = random_space(r, n)?;
    let mu = random_measure(r, &sp)?;
    let k = correlation_from_measure(&mu)?;
    let back = measure_from_correlation(&k)?;
    let mut scale: Vec<Complex64> = k.values().iter().zip(k.lambda_table()).map(|(v, l)| c(v.norm() * l)).collect();
    superset_zeta(&mut scale);
    Ok(max_scaled(back.values(), mu.values(), &scale))
}

/// `D(theta0; eta) = sum_{xi disjoint from eta} k(eta + xi) prod_{x in xi} theta0_x sigma_x`,
/// summed directly.
fn derivative_coefficients(r: &mut StreamRng, n: usize) -> Result<f64, HarnessError> {
    let sp = random_space(r, n)?;
    let mu = random_measure(r, &sp)?;
    let k = correlation_from_measure(&mu)?;
    let theta0 = random_field(r, n);
    let d = variational_derivatives(&mu, &theta0)?;
    let weight: Vec<Complex64> = (0..n).map(|x| theta0.get(x) * sp.sigma()[x]).collect();
    let full = (1usize << n) - 1;
    let mut worst = 0.0f64;
    for eta in 0..=full {
        let rest = full & !eta;
        let (mut sum, mut mag) = (c(0.0), 0.0);
        let mut xi = rest;
        loop {
            let w: Complex64 = (0..n).filter(|x| xi >> x & 1 == 1).map(|x| weight[x]).product();
            let t = k.values()[eta | xi] * w;
            sum += t;
            mag += t.norm();
            if xi == 0 {
                break;
            }
            xi = (xi - 1) & rest;
        }
        let err = (d.values()[eta] - sum).norm();
        worst = worst.max(if mag > 0.0 { err / mag } else { err });
    }
    Ok(worst)
}

/// Two-step shift `D(t1 + t2; eta) = sum_xi D(t1; eta + xi) e(t2, xi) lambda(xi)`
/// together with the derivative duality.
fn shift_identities(r: &mut StreamRng, n: usize) -> Result<f64, HarnessError> {
    let sp = random_space(r, n)?;
    let mu = random_measure(r, &sp)?;
    let t1 = random_field(r, n);
    let t2 = random_field(r, n);
    let both = variational_derivatives(&mu, &t1.add(&t2))?;
    let first = variational_derivatives(&mu, &t1)?;
    let full = (1usize << n) - 1;
    let lam = first.lambda_table();
    let e2: Vec<Complex64> = (0..=full).map(|m| coherent_state(&t2, first.configuration(m))).collect();
    let mut worst = 0.0f64;
    for eta in 0..=full {
        let rest = full & !eta;
        let (mut sum, mut mag) = (c(0.0), 0.0);
        let mut xi = rest;
        loop {
            let t = first.values()[eta | xi] * e2[xi] * lam[xi];
            sum += t;
            mag += t.norm();
            if xi == 0 {
                break;
            }
            xi = (xi - 1) & rest;
        }
        let err = (both.values()[eta] - sum).norm();
        worst = worst.max(if mag > 0.0 { err / mag } else { err });
    }
    let g = random_table(r, &sp, Role::QuasiObservable)?;
    let duality = derivative_duality(&g, &mu, &random_field(r, n))?.relative();
    Ok(worst.max(duality))
}

/// Block occupation probabilities counted directly and recovered from the
/// functional. Probabilities have total mass one, so the absolute gap is the
/// relative one.
fn occupation_route(r: &mut StreamRng, n: usize) -> Result<f64, HarnessError> {
    let sp = random_space(r, n)?;
    let mu = random_measure(r, &sp)?;
    // Random assignment of sites to two blocks or to neither.
    let mut blocks = [Configuration::EMPTY; 2];
    for x in 0..n {
        match r.random_range(0..5u32) {
            0 => {}
            1 | 2 => blocks[0] = blocks[0].with(x),
            _ => blocks[1] = blocks[1].with(x),
        }
    }
    let blocks: Vec<Configuration> = blocks.into_iter().filter(|b| !b.is_empty()).collect();
    if blocks.is_empty() {
        return Ok(0.0);
    }
    let mut worst = 0.0f64;
    let mut total = 0.0;
    let sizes: Vec<usize> = blocks.iter().map(|b| b.len()).collect();
    let mut counts = vec![0usize; blocks.len()];
    loop {
        let res = occupation_probabilities(&mu, &blocks, &counts)?;
        worst = worst.max((res.direct - res.via_functional).abs());
        total += res.direct;
        // Odometer over count vectors.
        let mut i = 0;
        while i < counts.len() && counts[i] == sizes[i] {
            counts[i] = 0;
            i += 1;
        }
        if i == counts.len() {
            break;
        }
        counts[i] += 1;
    }
    Ok(worst.max((total - 1.0).abs()))
}

// ------------------------------------------------------------ criterion 2

#[derive(Serialize)]
struct GnzRow {
    instance: u64,
    sites: usize,
    beta: f64,
    mayer_norm: f64,
    relative_residual: f64,
    perturbed_relative_residual: f64,
}

pub(super) fn gnz_suite(ctx: &SuiteContext) -> Result<Body, HarnessError> {
    let mut body = Body::default();
    let mut rows = Vec::new();
    for inst in 0..GNZ_INSTANCES {
        let mut r = ctx.stream(2, 0, inst);
        let n = 2 + (inst % 9) as usize;
        let sp = random_space(&mut r, n)?;
        let (phi, beta) = random_potential(&mut r, &sp, -0.5, 2.0, 0.15)?;
        let mu = phi.gibbs_measure()?;
        let table: Vec<f64> = (0..n << n).map(|_| r.random_range(-1.0..1.0)).collect();
        let h = |x: usize, g: Configuration| table[(x << n) | g.bits() as usize];
        let res = phi.gnz_residual(&mu, h)?;

        // Negative control: 10% more mass on the heaviest non-empty configuration.
        let target = (1..mu.len()).max_by(|&a, &b| mu.values()[a].re.total_cmp(&mu.values()[b].re)).unwrap_or(0);
        let mut vals = mu.values().to_vec();
        vals[target] *= 1.1;
        let total: Complex64 = vals.iter().sum();
        let bent = mu.with_values(vals.iter().map(|v| v / total).collect())?;
        let bad = phi.gnz_residual(&bent, h)?;

        rows.push(GnzRow {
            instance: inst,
            sites: n,
            beta,
            mayer_norm: phi.mayer_norm(),
            relative_residual: res.relative(),
            perturbed_relative_residual: bad.relative(),
        });
    }
    let worst = max_of(rows.iter().map(|r| r.relative_residual));
    body.check(Assertion::at_most(format!("GNZ residual over {GNZ_INSTANCES} Gibbs measures"), worst, ctx.tol(GNZ_TOL)));
    let weakest = rows.iter().map(|r| r.perturbed_relative_residual).fold(f64::INFINITY, f64::min);
    body.check(Assertion::at_least("perturbed-measure control residual (smallest)", weakest, GNZ_CONTROL_FLOOR));
    body.files.push(DataFile::csv("c2_gnz.csv", &rows)?);
    Ok(body)
}

// ------------------------------------------------------------ criterion 3

#[derive(Serialize)]
struct BogoliubovRow {
    instance: u64,
    sites: usize,
    source: &'static str,
    form_i: f64,
    form_ii: f64,
    form_iii: f64,
}

pub(super) fn bogoliubov_suite(ctx: &SuiteContext) -> Result<Body, HarnessError> {
    let mut body = Body::default();
    let mut rows = Vec::new();
    for inst in 0..BOGOLIUBOV_INSTANCES {
        let mut r = ctx.stream(3, 0, inst);
        let n = 2 + (inst % 7) as usize;
        let sp = random_space(&mut r, n)?;
        let (phi, _) = random_potential(&mut r, &sp, -0.3, 2.0, 0.1)?;
        let mu = phi.gibbs_measure()?;
        let k = correlation_from_measure(&mu)?;
        let theta = random_field(&mut r, n);
        let f = random_field(&mut r, n);
        for (label, source) in [("measure", &mu), ("correlation", &k)] {
            rows.push(BogoliubovRow {
                instance: inst,
                sites: n,
                source: label,
                form_i: bogoliubov_equation_residual(source, &phi, &theta, &BogoliubovForm::I)?,
                form_ii: bogoliubov_equation_residual(source, &phi, &theta, &BogoliubovForm::Ii { f: f.clone() })?,
                form_iii: bogoliubov_equation_residual(source, &phi, &theta, &BogoliubovForm::Iii { f: f.clone() })?,
            });
        }
    }
    let tol = ctx.tol(BOGOLIUBOV_TOL);
    body.check(Assertion::at_most("form (i) residual on Gibbs functionals", max_of(rows.iter().map(|r| r.form_i)), tol));
    body.check(Assertion::at_most("form (ii) residual on Gibbs functionals", max_of(rows.iter().map(|r| r.form_ii)), tol));
    body.check(Assertion::at_most("form (iii) residual on Gibbs functionals", max_of(rows.iter().map(|r| r.form_iii)), tol));

    // The forms also agree in failing: a random non-Gibbs measure violates
    // (i) and (ii) alike.
    let mut r = ctx.stream(3, 1, 0);
    let sp = random_space(&mut r, 6)?;
    let (phi, _) = random_potential(&mut r, &sp, 0.0, 2.0, 0.0)?;
    let mu = random_measure(&mut r, &sp)?;
    let theta = random_field(&mut r, 6);
    let f = random_field(&mut r, 6);
    let i = bogoliubov_equation_residual(&mu, &phi, &theta, &BogoliubovForm::I)?;
    let ii = bogoliubov_equation_residual(&mu, &phi, &theta, &BogoliubovForm::Ii { f })?;
    body.check(Assertion::new(
        "non-Gibbs control fails forms (i) and (ii) together",
        i > 1e-6 && ii > 1e-6,
        format!("form (i) {i:.3e}, form (ii) {ii:.3e}, both > 1e-6"),
    ));
    body.files.push(DataFile::csv("c3_bogoliubov.csv", &rows)?);
    Ok(body)
}
