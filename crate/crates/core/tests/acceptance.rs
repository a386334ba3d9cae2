//! Acceptance run. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use specbox::basis::Mode;
use specbox::eignd::{separable_capacity, separable_profiles, separable_spectrum, solve_nd};
use specbox::hadamard::{a1, a2, a_nu_1d, even_maclaurin_check};
use specbox::heat::{
    fit_spectrum, multiply_expansions, predicted_coefficients, AsymptoticFit, Expansion, Exponent,
    FitWindow,
};
use specbox::identities::{
    factorization_identity, refinement, reflection_identity_1d, sample_pairs,
    telescoped_dirichlet_trace, torus_image_identity_2d, trace_pairing_identity,
    trace_quadrupling_2d, IdentityOptions, IdentityReport, SolveCache,
};
use specbox::invariants::{bundle, compare, q_d_sums, BundleParams, CompareTolerances};
use specbox::model::{
    build_potential, reflect_potential, Bc, BoxProblem, CosineSpec, TrigPotential,
};
use specbox::Result;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn rel(x: f64, want: f64) -> f64 {
    (x - want).abs() / want.abs()
}

fn pot(sides: &[f64], terms: &[(&[i64], f64)]) -> TrigPotential {
    build_potential(&CosineSpec::new(
        sides.to_vec(),
        terms.iter().map(|(m, c)| (m.to_vec(), *c)),
    ))
    .expect("fixture potential")
}

fn ex(twice: &[i32]) -> Vec<Exponent> {
    twice.iter().map(|&e| Exponent(e)).collect()
}

fn fitted(f: &AsymptoticFit, twice: i32) -> f64 {
    f.get(Exponent(twice)).expect("fitted exponent")
}

fn known(pred: &Expansion, twice: &[i32]) -> Expansion {
    let mut k = Expansion::default();
    for &e in twice {
        k.add(Exponent(e), pred.get(Exponent(e)).unwrap_or(0.0));
    }
    k
}

fn c2_potential() -> TrigPotential {
    pot(&[1.0, 2f64.sqrt()], &[(&[1, 1], 1.0), (&[2, 0], 0.3)])
}

fn c3_potential() -> TrigPotential {
    pot(
        &[1.0, 2f64.sqrt(), 3f64.sqrt()],
        &[
            (&[1, 0, 0], 1.0),
            (&[0, 1, 0], 0.5),
            (&[0, 0, 2], 0.3),
            (&[2, 0, 0], 0.2),
        ],
    )
}

fn one_d_fixtures() -> Vec<(&'static str, TrigPotential)> {
    vec![
        ("cos(pi x)", pot(&[1.0], &[(&[1], 1.0)])),
        (
            "cos(2pi x)+0.3cos(3pi x)",
            pot(&[1.0], &[(&[2], 1.0), (&[3], 0.3)]),
        ),
        (
            "0.5+cos(pi x/a), a=sqrt2",
            pot(&[2f64.sqrt()], &[(&[0], 0.5), (&[1], -0.8)]),
        ),
    ]
}

const BCS: [(Bc, Bc); 4] = [
    (Bc::Dirichlet, Bc::Dirichlet),
    (Bc::Dirichlet, Bc::Neumann),
    (Bc::Neumann, Bc::Dirichlet),
    (Bc::Neumann, Bc::Neumann),
];

fn bc_name(bc: (Bc, Bc)) -> String {
    format!("{}{}", bc.0.letter(), bc.1.letter())
}

/// Runs `f` on a doubling ladder. Every step must satisfy the refinement
/// rule and the finest run must pass within its tail budget.
fn ladder(
    sizes: &[usize],
    opts: &IdentityOptions,
    f: impl Fn(&IdentityOptions) -> Result<IdentityReport>,
) -> Result<(bool, String)> {
    let last = *sizes.last().expect("ladder sizes");
    let mut runs = Vec::new();
    for &k in sizes {
        let o = opts.with_size(k);
        runs.push(if k == last {
            f(&o)?
        } else {
            f(&o.unbudgeted())?
        });
    }
    let fine = runs.last().expect("ladder runs");
    let mut pass = fine.pass;
    let mut trail = Vec::new();
    for w in runs.windows(2) {
        let r = refinement(&w[0], &w[1]);
        pass &= r.pass;
        trail.push(format!("{:.1e}", w[0].residual));
    }
    trail.push(format!("{:.1e}", fine.residual));
    Ok((pass, format!("{} [{}]", fine.name, trail.join(" > "))))
}

fn criterion_1() -> Result<Outcome> {
    let (a, b) = (1.0, 2f64.sqrt());
    let bx = BoxProblem::dirichlet(vec![a, b])?;
    let s = solve_nd(
        &TrigPotential::zero(vec![a, b]),
        &bx,
        &[48, 48],
        &Mode::IntervalFaces,
        false,
    )?;
    let (f, _) = fit_spectrum(
        &s,
        &ex(&[-2, -1, 0]),
        &ex(&[1]),
        None,
        &FitWindow::default(),
    )?;
    let area = a * b / (4.0 * PI);
    let perimeter = -2.0 * (a + b) / (8.0 * PI.sqrt());
    let r_area = rel(fitted(&f, -2), area);
    let r_perim = rel(fitted(&f, -1), perimeter);
    let c0 = fitted(&f, 0);
    let d0 = (c0 - 0.25).abs();
    Ok(Outcome::new(
        r_area <= 1e-3 && r_perim <= 1e-3 && d0 <= 0.01,
        format!(
            "c_-1 rel {r_area:.1e}, c_-1/2 rel {r_perim:.1e}, c_0 = {c0:.6} (corner value 1/4, |dev| {d0:.1e})"
        ),
    ))
}

fn criterion_2() -> Result<Outcome> {
    let sides = vec![1.0, 2f64.sqrt()];
    let bx = BoxProblem::dirichlet(sides.clone())?;
    let window = FitWindow {
        eps: 1e-14,
        span: 4.0,
        points: 60,
    };
    let fit = |q: &TrigPotential| -> Result<(AsymptoticFit, Expansion)> {
        let pred = predicted_coefficients(&bx, q)?;
        let s = solve_nd(q, &bx, &[72, 72], &Mode::IntervalFaces, false)?;
        let (f, _) = fit_spectrum(
            &s,
            &ex(&[0, 1, 2, 3]),
            &ex(&[4, 5, 6]),
            Some(&known(&pred, &[-2, -1])),
            &window,
        )?;
        Ok((f, pred))
    };

    let q = c2_potential();
    let (f, pred) = fit(&q)?;
    let area = sides[0] * sides[1];
    let int_q = 0.0;
    let corners: f64 = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]
        .iter()
        .map(|&(u, v)| q.evaluate(&[u * sides[0], v * sides[1]]).unwrap())
        .sum();
    // cos^2 cos^2 averages 1/4, 0.09 cos^2 averages 0.045.
    let int_q2 = area * (0.25 + 0.045);
    let c0_oracle = 0.25 - int_q / (4.0 * PI);
    let c1_oracle = int_q2 / (8.0 * PI) - corners / 16.0;
    let c0_pred = pred.get(Exponent(0)).unwrap();
    let c1_pred = pred.get(Exponent(2)).unwrap();
    let oracle_ok = (c0_pred - c0_oracle).abs() <= 1e-12 && (c1_pred - c1_oracle).abs() <= 1e-12;
    let r0 = rel(fitted(&f, 0), c0_pred);
    let r1 = rel(fitted(&f, 2), c1_pred);

    let shifted = q.shifted(0.5);
    let (g, _) = fit(&shifted)?;
    let int_shifted = 0.5 * area;
    let recovered = 4.0 * PI * (0.25 - fitted(&g, 0));
    let r_int = rel(recovered, int_shifted);
    Ok(Outcome::new(
        oracle_ok && r0 <= 0.02 && r1 <= 0.02 && r_int <= 0.01,
        format!(
            "c_0 rel {r0:.1e}, c_1 rel {r1:.1e}, int q from c_0 (q+0.5) rel {r_int:.1e}, closed form agrees: {oracle_ok}"
        ),
    ))
}

fn criterion_3() -> Result<Outcome> {
    let q = c3_potential();
    let sides = q.sides().to_vec();
    let bx = BoxProblem::dirichlet(sides.clone())?;
    let profiles = separable_profiles(&q)?;
    let pred = predicted_coefficients(&bx, &q)?;

    let mut product: Option<Expansion> = None;
    for (i, prof) in profiles.iter().enumerate() {
        let e = predicted_coefficients(&BoxProblem::dirichlet(vec![sides[i]])?, prof)?;
        product = Some(match product {
            None => e,
            Some(acc) => multiply_expansions(&acc, &e, Exponent(4)),
        });
    }
    let product = product.expect("three factors");
    let mut law = 0.0f64;
    for e in Exponent::range(Exponent(-3), Exponent(2)) {
        let (x, y) = (pred.get(e).unwrap_or(0.0), product.get(e).unwrap_or(0.0));
        law = law.max((x - y).abs());
    }

    let sizes = [400, 400, 400];
    let count = separable_capacity(&profiles, &bx, &sizes)?;
    let s = separable_spectrum(&profiles, &bx, &sizes, count)?;
    let window = FitWindow {
        eps: 1e-14,
        span: 8.0,
        points: 60,
    };
    let (f, _) = fit_spectrum(
        &s,
        &ex(&[-1, 0, 1, 2]),
        &ex(&[3, 4, 5]),
        Some(&known(&pred, &[-3, -2])),
        &window,
    )?;
    let worst = f
        .compared()
        .iter()
        .map(|&e| rel(f.fitted[&e], pred.get(e).unwrap()))
        .fold(0.0, f64::max);
    Ok(Outcome::new(
        law <= 1e-10 && worst <= 0.03,
        format!(
            "product law max |dev| {law:.1e}, worst fitted rel {worst:.1e} ({count} eigenvalues)"
        ),
    ))
}

fn criterion_4(cache: &SolveCache) -> Result<Outcome> {
    let mut pass = true;
    let mut notes = Vec::new();
    for (name, p) in one_d_fixtures() {
        let a = p.sides()[0];
        let pts: Vec<(f64, f64)> = sample_pairs(&[a], 25, 0)?
            .into_iter()
            .map(|(x, y)| (x[0], y[0]))
            .collect();
        let opts = IdentityOptions::scaled(a, 1e-7, 64);
        for bc in BCS {
            let (ok, note) = ladder(&[16, 32, 64], &opts, |o| {
                reflection_identity_1d(cache, &p, bc, &pts, o)
            })?;
            pass &= ok;
            if !ok || name == "cos(pi x)" {
                notes.push(format!("{}/{}", bc_name(bc), note));
            }
        }
    }
    Ok(Outcome::new(pass, notes.join("; ")))
}

fn criterion_5(cache: &SolveCache) -> Result<Outcome> {
    let q = pot(&[1.0, 1.0], &[(&[1, 1], 1.0)]);
    let r = c2_potential();
    let mut pass = true;
    let mut notes = Vec::new();
    let sizes = [4, 8, 16];
    for (p, faces) in [
        (&q, vec![(Bc::Dirichlet, Bc::Dirichlet); 2]),
        (
            &q,
            vec![(Bc::Dirichlet, Bc::Neumann), (Bc::Neumann, Bc::Neumann)],
        ),
        (&r, vec![(Bc::Dirichlet, Bc::Dirichlet); 2]),
    ] {
        let bx = BoxProblem::new(p.sides().to_vec(), faces)?;
        let pts = sample_pairs(p.sides(), 25, 0)?;
        let opts = IdentityOptions::scaled(p.sides()[0], 1e-5, 16);
        let (ok, note) = ladder(&sizes, &opts, |o| {
            torus_image_identity_2d(cache, p, &bx, &pts, o)
        })?;
        pass &= ok;
        notes.push(format!("{}: {note}", bx.bc_tag()));
    }
    for p in [&q, &r] {
        let bx = BoxProblem::dirichlet(p.sides().to_vec())?;
        let opts = IdentityOptions::scaled(p.sides()[0], 1e-5, 16);
        let (ok, note) = ladder(&sizes, &opts, |o| trace_quadrupling_2d(cache, p, &bx, o))?;
        pass &= ok;
        notes.push(note);
    }
    Ok(Outcome::new(pass, notes.join("; ")))
}

fn criterion_6(cache: &SolveCache) -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut pass = true;
    for (_, p) in one_d_fixtures() {
        let r =
            trace_pairing_identity(cache, &p, &IdentityOptions::scaled(p.sides()[0], 1e-8, 64))?;
        pass &= r.pass;
        worst = worst.max(r.residual);
    }
    Ok(Outcome::new(pass, format!("max residual {worst:.1e}")))
}

fn criterion_7(cache: &SolveCache) -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut pass = true;
    for (_, p) in one_d_fixtures() {
        let r = telescoped_dirichlet_trace(
            cache,
            &p,
            &IdentityOptions::scaled(p.sides()[0], 1e-7, 64),
        )?;
        pass &= r.pass;
        worst = worst.max(r.residual);
    }
    Ok(Outcome::new(pass, format!("max residual {worst:.1e}")))
}

fn criterion_8(cache: &SolveCache) -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut pass = true;
    for p in [
        c2_potential(),
        pot(
            &[1.0, 1.3],
            &[
                (&[1, 1], 0.8),
                (&[1, 0], 0.5),
                (&[0, 2], -0.4),
                (&[2, 1], 0.2),
            ],
        ),
    ] {
        let bx = BoxProblem::dirichlet(p.sides().to_vec())?;
        let pts = sample_pairs(p.sides(), 25, 0)?;
        for axis in 0..2 {
            let r = factorization_identity(
                cache,
                &p,
                &bx,
                axis,
                &pts,
                &IdentityOptions::scaled(p.sides()[0], 1e-8, 20),
            )?;
            pass &= r.pass;
            worst = worst.max(r.residual);
        }
    }
    Ok(Outcome::new(pass, format!("max residual {worst:.1e}")))
}

fn criterion_9() -> Result<Outcome> {
    let fixtures = [
        pot(&[1.0], &[(&[1], 0.8), (&[2], -0.3)]),
        pot(&[1.3], &[(&[1], 1.0), (&[3], 0.25)]),
    ];
    let pairs = [
        (0.3, 0.8),
        (-0.4, 0.2),
        (0.7, 0.7),
        (1.1, -0.3),
        (0.0, 0.95),
    ];
    let mut closed = 0.0f64;
    for p in &fixtures {
        for &(x, y) in &pairs {
            closed = closed
                .max((a_nu_1d(p, 1, x, y)? - a1(p, &[x], &[y])?).abs())
                .max((a_nu_1d(p, 2, x, y)? - a2(p, &[x], &[y])?).abs());
        }
    }

    let mut constant = 0.0f64;
    for gamma in [-1.5, 0.4, 2.0] {
        let c = TrigPotential::constant(vec![1.0], gamma);
        let mut fact = 1.0;
        for nu in 1..=4 {
            fact *= nu as f64;
            let want = (-gamma).powi(nu as i32) / fact;
            for &(x, y) in &pairs {
                constant = constant.max((a_nu_1d(&c, nu, x, y)? - want).abs());
            }
        }
    }

    let mut odd = 0.0f64;
    for p in &fixtures {
        let a = p.sides()[0];
        for nu in 1..=3 {
            for base in [0.0, a] {
                odd = odd.max(even_maclaurin_check(p, nu, base, -1.0)?.max_magnitude);
            }
        }
    }
    Ok(Outcome::new(
        closed <= 1e-8 && constant <= 1e-10 && odd <= 1e-6,
        format!(
            "closed forms {closed:.1e}, constant law {constant:.1e}, odd derivatives {odd:.1e}"
        ),
    ))
}

fn criterion_10() -> Result<Outcome> {
    let sides = vec![1.0, 2f64.sqrt()];
    let bx = BoxProblem::dirichlet(sides.clone())?;
    let p = pot(
        &sides,
        &[
            (&[1, 1], 1.0),
            (&[1, 0], 0.4),
            (&[0, 2], -0.3),
            (&[2, 1], 0.2),
        ],
    );
    let params = BundleParams::default();
    let tol = CompareTolerances::default();
    let a = bundle(&p, &bx, &params)?;
    let b = bundle(&reflect_potential(&p)?, &bx, &params)?;
    let same = compare(&a, &b, &tol)?;
    let bump = pot(&sides, &[(&[0, 1], 0.05)]);
    let c = bundle(&p.sum(&bump)?, &bx, &params)?;
    let diff = compare(&a, &c, &tol)?;
    Ok(Outcome::new(
        same.consistent && !diff.consistent && diff.separation > 100.0,
        format!(
            "reflected pair separation {:.1e} over {} components; perturbed pair separation {:.1e}",
            same.separation,
            same.components.len(),
            diff.separation
        ),
    ))
}

fn criterion_11() -> Result<Outcome> {
    let separable = [
        pot(
            &[1.0, 1.2],
            &[(&[1, 0], 1.0), (&[0, 3], -0.5), (&[2, 0], 0.3)],
        ),
        pot(&[1.0, 2f64.sqrt()], &[(&[0, 1], 0.7), (&[0, 2], 0.2)]),
        c3_potential(),
    ];
    let mut vanish = 0.0f64;
    for p in &separable {
        for s in q_d_sums(p, 8)? {
            vanish = vanish.max(s.value.abs());
        }
    }

    let (a, b, c) = (1.0, 1.3, 0.8);
    let q = pot(&[a, b], &[(&[1, 1], c)]);
    let mut parseval = 0.0f64;
    for s in q_d_sums(&q, 8)? {
        // Two of the four modes survive when |k1| = |k2|.
        let hits = s
            .vectors
            .iter()
            .filter(|k| k[0].abs() == k[1].abs())
            .count();
        let want = hits as f64 * c * c * a * b / 2.0;
        parseval = parseval.max((s.value - want).abs());
    }
    Ok(Outcome::new(
        vanish <= 1e-12 && parseval <= 1e-10,
        format!("separable max {vanish:.1e}, product-cosine deviation {parseval:.1e}"),
    ))
}

fn main() -> ExitCode {
    let cache = SolveCache::new();
    let criteria: Vec<(&str, Box<dyn Fn() -> Result<Outcome> + '_>)> = vec![
        ("free-box heat coefficients", Box::new(criterion_1)),
        ("potential-dependent coefficients", Box::new(criterion_2)),
        ("3D product law and fit", Box::new(criterion_3)),
        ("1D reflection identities", Box::new(|| criterion_4(&cache))),
        ("2D image and quadrupling", Box::new(|| criterion_5(&cache))),
        ("trace pairing", Box::new(|| criterion_6(&cache))),
        (
            "telescoped Dirichlet trace",
            Box::new(|| criterion_7(&cache)),
        ),
        ("factorization", Box::new(|| criterion_8(&cache))),
        ("Hadamard coefficients", Box::new(criterion_9)),
        ("invariant bundle pairs", Box::new(criterion_10)),
        ("separability sums", Box::new(criterion_11)),
    ];
    let filter: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.trim_start_matches('C').parse().ok())
        .collect();

    let mut failed = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !filter.is_empty() && !filter.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let o = run().unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!o.pass);
        println!(
            "C{n:<2} {verdict} {title} ({:.1}s): {}",
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
