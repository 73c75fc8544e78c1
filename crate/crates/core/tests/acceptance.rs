//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use secluded::bounds::{lower_bound_k_diameter, lower_bound_k_measure, nfl_lower, table};
use secluded::depth::{harmonic_family, multiplicity_identity_check, pigeonhole_witness};
use secluded::rounding::{adversarial_transversal, replicate_collapse, uniform_choice_oracle, universal_round};
use secluded::sperner::{find_rich_point, random_valid_coloring};
use secluded::{
    audit_seclusion, build_profile, enumerate_neighborhood, lower_bound_witness, AuditOptions, AxisBox, BallKind,
    BoxFamily, Error, GridColoring, Interval, MemberId, NormKind, PartitionSpec, Point, RoundingScheme, Scalar,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn q(n: i64, d: i64) -> Scalar {
    Scalar::ratio(n, d)
}

/// `⌈base^d⌉` by exact rational arithmetic.
fn ceil_pow(base: &Scalar, d: usize) -> BigUint {
    base.powi(d as u32).ceil().to_biguint().unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn exact(ball: BallKind) -> AuditOptions {
    AuditOptions::exact(ball)
}

fn audit(spec: &PartitionSpec, eps: &Scalar) -> Result<secluded::AuditResult, String> {
    audit_seclusion(spec, eps, &exact(BallKind::Closed)).map_err(|e| e.to_string())
}

fn grid_tightness() -> Outcome {
    let mut notes = Vec::new();
    for d in 1..=6usize {
        let start = Instant::now();
        let r = audit(&PartitionSpec::grid(d).unwrap(), &q(1, 2))?;
        let took = start.elapsed();
        let want = ceil_pow(&Scalar::from(2), d);
        ensure(
            BigUint::from(r.max_count) == want && want == BigUint::from(1u32) << d,
            || format!("d={d}: max_count {} != 2^{d}", r.max_count),
        )?;
        ensure(r.exhaustive, || format!("d={d}: audit not exhaustive"))?;
        let limit = Duration::from_secs(if d <= 5 { 60 } else { 600 });
        ensure(took < limit, || format!("d={d}: took {took:?}"))?;
        notes.push(format!("d={d}:{}", r.max_count));
    }
    Ok(notes.join(" "))
}

fn layered_certification() -> Outcome {
    let mut default_notes = Vec::new();
    let mut default_ok = true;
    for d in 1..=4usize {
        let eps = q(1, 2 * d as i64);
        let r = audit(&PartitionSpec::layered_default(d).unwrap(), &eps)?;
        if r.max_count != d + 1 {
            default_ok = false;
        }
        default_notes.push(format!("d={d}:{} at {}", r.max_count, r.witness));
    }
    let mut pinned = Vec::new();
    for d in 1..=4usize {
        let eps = q(1, 2 * d as i64);
        let r = audit(&PartitionSpec::layered_staggered(d).unwrap(), &eps)?;
        let lower = ceil_pow(&(Scalar::one() + Scalar::from(2) * &eps), d);
        ensure(BigUint::from(r.max_count) >= lower, || {
            format!("staggered d={d}: {} below {lower}", r.max_count)
        })?;
        ensure(r.max_count == d + 1, || {
            format!("staggered d={d}: {} != {}", r.max_count, d + 1)
        })?;
        pinned.push(format!("d={d}:{}", r.max_count));
    }
    let schedule = if default_ok {
        "default schedule certified".to_string()
    } else {
        format!(
            "default schedule [{}] not (d+1)-secluded; pinned staggered schedule",
            default_notes.join(", ")
        )
    };
    Ok(format!("{schedule}: {}", pinned.join(" ")))
}

fn witness_sweep() -> Outcome {
    let mut specs: Vec<(String, PartitionSpec)> = Vec::new();
    for d in 1..=4 {
        specs.push((format!("grid{d}"), PartitionSpec::grid(d).unwrap()));
        specs.push((format!("layered{d}"), PartitionSpec::layered_default(d).unwrap()));
        specs.push((format!("staggered{d}"), PartitionSpec::layered_staggered(d).unwrap()));
        for b in 1..=d {
            specs.push((format!("profile(b={b},d={d})"), build_profile(|_| b, d).unwrap().0));
        }
    }
    let epsilons = [q(1, 8), q(1, 4), q(3, 8), q(1, 2)];
    let mut checked = 0;
    for (name, spec) in &specs {
        for eps in &epsilons {
            let d = spec.dim();
            let w = lower_bound_witness(spec, eps).map_err(|e| format!("{name} ε={eps}: {e}"))?;
            let need = ceil_pow(&(Scalar::one() + Scalar::from(2) * eps), d);
            let seen = enumerate_neighborhood(spec, &w.point, eps, BallKind::Open).unwrap();
            ensure(seen.count == w.count && BigUint::from(seen.count) >= need, || {
                format!("{name} ε={eps}: {} members, need {need}", seen.count)
            })?;
            checked += 1;
        }
    }
    Ok(format!("{checked} (spec, ε) pairs"))
}

fn random_point(rng: &mut ChaCha8Rng, d: usize, lo: i64, hi: i64, den: i64) -> Point {
    Point::new((0..d).map(|_| q(rng.random_range(lo * den..=hi * den), den)).collect()).unwrap()
}

fn gluing() -> Outcome {
    let cases: Vec<(usize, usize)> = [(1, 3), (2, 4)].into_iter().chain((1..=4).map(|d| (d, d))).collect();
    let mut notes = Vec::new();
    for &(b, d) in &cases {
        let (spec, claim) = build_profile(|_| b, d).unwrap();
        let eps = q(1, 2 * b as i64);
        ensure(claim.epsilon == eps, || {
            format!("(f={b},d={d}): claim ε {}", claim.epsilon)
        })?;
        let r = audit(&spec, &eps)?;
        ensure(BigUint::from(r.max_count) <= claim.k, || {
            format!("(f={b},d={d}): audited {} > claimed {}", r.max_count, claim.k)
        })?;
        notes.push(format!("({b},{d}):{}≤{}", r.max_count, claim.k));
    }
    // product neighborhoods are Cartesian products of factor neighborhoods
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let factors = vec![
        PartitionSpec::layered_default(2).unwrap(),
        PartitionSpec::layered_staggered(3).unwrap(),
        PartitionSpec::grid(1).unwrap(),
    ];
    let prod = PartitionSpec::product(factors.clone()).unwrap();
    for i in 0..100 {
        let eps = q(rng.random_range(1..=12), 12);
        let kind = if i % 2 == 0 { BallKind::Closed } else { BallKind::Open };
        let parts: Vec<Point> = factors
            .iter()
            .map(|f| random_point(&mut rng, f.dim(), -3, 3, 24))
            .collect();
        let got = enumerate_neighborhood(&prod, &Point::concat(&parts), &eps, kind)
            .unwrap()
            .members;
        let mut want: Vec<MemberId> = vec![MemberId::new(vec![])];
        for (f, p) in factors.iter().zip(&parts) {
            let n = enumerate_neighborhood(f, p, &eps, kind).unwrap().members;
            want = want
                .iter()
                .flat_map(|a| n.iter().map(move |b| MemberId::concat(&[a.clone(), b.clone()])))
                .collect();
        }
        want.sort();
        ensure(got == want, || format!("product neighborhood mismatch at query {i}"))?;
    }
    Ok(format!("{}; 100 product queries equal", notes.join(" ")))
}

fn random_family(rng: &mut ChaCha8Rng) -> BoxFamily {
    let d = rng.random_range(1..=3usize);
    let n = rng.random_range(0..=25usize);
    let den = rng.random_range(1..=10i64);
    let side = |rng: &mut ChaCha8Rng| {
        let a = rng.random_range(0..den);
        let b = rng.random_range(a + 1..=den);
        Interval::new(q(a, den), q(b, den), rng.random(), rng.random())
    };
    let container = AxisBox::from_intervals(vec![Interval::closed(Scalar::zero(), Scalar::one()); d]).unwrap();
    let members = (0..n)
        .map(|_| AxisBox::from_intervals((0..d).map(|_| side(rng)).collect()).unwrap())
        .collect();
    BoxFamily::new(container, members).unwrap()
}

fn depth_at(fam: &BoxFamily, p: &Point) -> usize {
    fam.members
        .iter()
        .filter(|m| m.sides().iter().zip(p.coords()).all(|(s, x)| s.contains(x)))
        .count()
}

fn depth_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..500 {
        let fam = random_family(&mut rng);
        let total: Scalar = fam
            .members
            .iter()
            .map(|m| m.sides().iter().map(|s| &s.hi - &s.lo).product::<Scalar>())
            .sum();
        let check = multiplicity_identity_check(&fam).map_err(|e| e.to_string())?;
        ensure(check.equal && check.depth_integral == total, || {
            format!("family {i}: Σvol {total} vs ∫depth {}", check.depth_integral)
        })?;
        let w = pigeonhole_witness(&fam).map_err(|e| format!("family {i}: {e}"))?;
        let need = total.ceil();
        ensure(
            depth_at(&fam, &w.point) == w.depth && BigInt::from(w.depth) >= need,
            || format!("family {i}: witness depth {} vs guarantee {need}", w.depth),
        )?;
    }
    for n in 1..=12 {
        let fam = harmonic_family(n);
        let w = pigeonhole_witness(&fam).map_err(|e| e.to_string())?;
        ensure(w.depth == n && depth_at(&fam, &w.point) == n, || {
            format!("harmonic n={n}: depth {}", w.depth)
        })?;
    }
    Ok("500 random families; harmonic n=1..12".into())
}

fn brute_colors(c: &GridColoring, p: &Point, eps: &Scalar) -> BTreeSet<u32> {
    let res = c.resolution();
    let d = res.len();
    let total: usize = res.iter().product();
    let mut out = BTreeSet::new();
    for flat in 0..total {
        let mut rest = flat;
        let mut meets = true;
        for i in (0..d).rev() {
            let j = (rest % res[i]) as i64;
            rest /= res[i];
            let lo = q(j, res[i] as i64);
            let hi = q(j + 1, res[i] as i64);
            meets &= lo < &p[i] + eps && hi > &p[i] - eps;
        }
        if meets {
            out.insert(c.cells()[flat]);
        }
    }
    out
}

fn sperner() -> Outcome {
    let epsilons = [q(1, 8), q(1, 4), q(1, 2)];
    let mut colorings: Vec<GridColoring> = (1..=3).map(|d| GridColoring::orthants(d).unwrap()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..200 {
        let res = [rng.random_range(2..=16), rng.random_range(2..=16)];
        let extra = rng.random_range(0..=3);
        colorings.push(random_valid_coloring(2, &res, extra, &mut rng).unwrap());
    }
    for (i, c) in colorings.iter().enumerate() {
        for eps in &epsilons {
            let r = find_rich_point(c, eps).map_err(|e| format!("coloring {i} ε={eps}: {e}"))?;
            let need = ceil_pow(&(Scalar::one() + q(2, 3) * eps), c.dim());
            let seen = brute_colors(c, &r.point, eps);
            ensure(seen.len() == r.count && BigUint::from(r.count) >= need, || {
                format!("coloring {i} ε={eps}: {} colors, need {need}", seen.len())
            })?;
        }
    }
    // paint a strip joining both faces of one axis with a fresh color
    let mut rejected = 0;
    for trial in 0..40 {
        let res = vec![rng.random_range(2..=8), rng.random_range(2..=8)];
        let base = random_valid_coloring(2, &res, 0, &mut rng).unwrap();
        let axis = trial % 2;
        let mut cells = base.cells().to_vec();
        for j in 0..res[axis] {
            let idx = if axis == 0 { [j, 0] } else { [0, j] };
            cells[idx[0] * res[1] + idx[1]] = 99;
        }
        let bad = GridColoring::new(2, res, cells, None).unwrap();
        match find_rich_point(&bad, &q(1, 4)) {
            Err(Error::OppositeFaces { color: 99, axis: a }) if a == axis => rejected += 1,
            other => {
                return Err(format!(
                    "invalid coloring {trial} not rejected on axis {axis}: {other:?}"
                ))
            }
        }
    }
    Ok(format!(
        "{} colorings × 3 radii; {rejected} invalid colorings rejected",
        colorings.len()
    ))
}

fn universal_rounding() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for d in 1..=3usize {
        for eps0 in [q(1, 100), q(1, 8)] {
            let reach = Scalar::from(2 * d as i64) * &eps0;
            for i in 0..10_000 {
                let x = random_point(&mut rng, d, -10, 10, 1000);
                // offsets on a grid of the closed ball, endpoints included
                let steps = 64;
                let offset: Vec<Scalar> = (0..d)
                    .map(|_| &eps0 * q(rng.random_range(-steps..=steps), steps))
                    .collect();
                let xhat = x.add(&Point::new(offset).unwrap()).unwrap();
                let y = universal_round(d, &eps0, &xhat).map_err(|e| e.to_string())?;
                let err = y.dist_inf(&x).unwrap();
                ensure(err <= reach, || {
                    format!("d={d} ε₀={eps0} pair {i}: error {err} > {reach}")
                })?;
            }
            let scheme = RoundingScheme::universal(d, &eps0).unwrap();
            for i in 0..1000 {
                let x = random_point(&mut rng, d, -10, 10, 997);
                let k = scheme.output_set(&x, &eps0).map_err(|e| e.to_string())?.k_observed;
                ensure(k <= d + 1, || format!("d={d} ε₀={eps0} anchor {i}: {k} outputs"))?;
            }
        }
    }
    Ok("d=1..3, ε₀∈{1/100,1/8}: 10^4 pairs and 10^3 output sets each".into())
}

fn nfl_demo() -> Outcome {
    let d = 2;
    let delta = q(1, 2);
    let trials: u64 = 10_000;
    let mut notes = Vec::new();
    for eps0 in [q(1, 2), q(1, 1), q(2, 1)] {
        let scheme = RoundingScheme::new(
            PartitionSpec::layered_default(d).unwrap(),
            Scalar::one(),
            secluded::Representative::Center,
        )
        .unwrap();
        let t = adversarial_transversal(&scheme, &eps0).map_err(|e| e.to_string())?;
        // ε is the scheme's rounding radius, half the member diameter
        let eps = scheme.member_diameter() * q(1, 2);
        let need = ceil_pow(&(Scalar::one() + &eps0 / (Scalar::from(2) * &eps)), d);
        let size = t.points.len();
        ensure(BigUint::from(size) >= need && t.bound == need, || {
            format!("ε₀={eps0}: |T|={size}, need {need}")
        })?;
        let stats = replicate_collapse(&scheme, uniform_choice_oracle(t.points.clone()), &t.center, trials, 8)
            .map_err(|e| e.to_string())?;
        ensure(stats.max_oracle_error <= eps0.clone() * q(1, 2), || {
            format!("ε₀={eps0}: oracle outside the ball")
        })?;
        let k_obs = stats.k_for_mass(&delta);
        // each output carries mass 1/|T|; allow the top outputs a 3σ binomial excess
        let n = trials as f64;
        let p = 1.0 / size as f64;
        let per_output = n * p + 3.0 * (n * p * (1.0 - p)).sqrt();
        let floor = (1.0 - 0.5) * n / per_output;
        ensure(k_obs as f64 >= floor, || {
            format!("ε₀={eps0}: k_obs {k_obs} < {floor:.2}")
        })?;
        // the tolerance no k-pseudodeterministic scheme can beat
        let k = scheme.degree(&eps0).map_err(|e| e.to_string())?;
        let got = nfl_lower(&eps0, d, &BigUint::from(k)).unwrap();
        let e0 = eps0.to_f64();
        let want = e0.max(e0 * d as f64 / (4.0 * (2.0 * k as f64).ln()));
        ensure((got - want).abs() <= 1e-12 * want && got >= e0, || {
            format!("ε₀={eps0}: nfl {got} vs {want}")
        })?;
        ensure(scheme.accuracy(&eps0).to_f64() >= got, || {
            format!("ε₀={eps0}: scheme beats the lower bound")
        })?;
        let uni = RoundingScheme::universal(d, &eps0).unwrap();
        let uni_lower = nfl_lower(&eps0, d, &BigUint::from(d + 1)).unwrap();
        ensure(
            (Scalar::from(2 * d as i64) * &eps0).to_f64() >= uni_lower && uni.degree(&eps0).unwrap() <= d + 1,
            || format!("ε₀={eps0}: universal scheme inconsistent with the lower bound"),
        )?;
        notes.push(format!(
            "ε₀={eps0}: |T|={size} k_obs={k_obs} (≥{floor:.2}) nfl={got:.4}"
        ));
    }
    Ok(notes.join("; "))
}

// --- independent decimal oracle for the bound table -----------------------

const PI_100: &str =
    "3.1415926535897932384626433832795028841971693993751058209749445923078164062862089986280348253421170679";

fn pi_approx() -> BigRational {
    let digits = PI_100.replace('.', "");
    let n: BigInt = digits.parse().unwrap();
    BigRational::new(n, Pow::pow(BigInt::from(10), (digits.len() - 1) as u32))
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, i| a * i)
}

/// `⌊x^{1/n}·S⌋/S` for a positive rational `x`, with `S = 10^80`.
fn root_approx(x: &BigRational, n: u32) -> BigRational {
    let s: BigInt = Pow::pow(BigInt::from(10), 80u32);
    let scaled = (x * BigRational::from_integer(Pow::pow(&s, n))).floor().to_integer();
    let r = scaled.to_biguint().unwrap().nth_root(n);
    BigRational::new(BigInt::from(r), s)
}

/// `(1 + ε·c/g^{1/d})^d` where the table writes the ℓ1 and ℓ2 rows with
/// `c = 2, g = d!` and `c = √π, g = Γ(d/2 + 1)`.
fn oracle_value(norm: NormKind, d: usize, eps: &Scalar) -> BigRational {
    let pi = pi_approx();
    let sqrt_pi = root_approx(&pi, 2);
    let (c, g) = match norm {
        NormKind::LInf => (BigRational::from_integer(2.into()), BigRational::one()),
        NormKind::L1 => (
            BigRational::from_integer(2.into()),
            BigRational::from_integer(factorial(d as u64)),
        ),
        NormKind::L2 => {
            let gamma = if d.is_multiple_of(2) {
                BigRational::from_integer(factorial(d as u64 / 2))
            } else {
                // Γ(m + 1/2) = (2m)!·√π / (4^m·m!) with m = (d+1)/2
                let m = (d as u64).div_ceil(2);
                BigRational::new(factorial(2 * m), Pow::pow(BigInt::from(4), m) * factorial(m)) * &sqrt_pi
            };
            (sqrt_pi.clone(), gamma)
        }
    };
    let base = BigRational::one() + eps.as_rational() * c / root_approx(&g, d as u32);
    Pow::pow(base, d as u32)
}

/// Whether `shown` is `x` rounded to 30 significant digits (allowing for
/// the oracle's own error far below that).
fn matches_30_digits(shown: &str, x: &BigRational) -> bool {
    let Ok(v) = shown.parse::<Scalar>() else {
        return false;
    };
    let digits = shown.chars().filter(char::is_ascii_digit).collect::<String>();
    let significant = digits.trim_start_matches('0').len();
    // 10^e ≤ x < 10^(e+1)
    let ten = BigRational::from_integer(10.into());
    let mut e: i32 = 0;
    while Pow::pow(&ten, e + 1) <= *x {
        e += 1;
    }
    let ulp = Pow::pow(&ten, e - 29);
    let gap = (v.as_rational() - x).abs();
    significant == 30 && gap <= ulp / BigRational::from_integer(2.into()) + Pow::pow(&ten, -60)
}

fn bounds_table() -> Outcome {
    let mut rows_checked = 0;
    for eps in [q(1, 8), q(1, 4), q(1, 2)] {
        let rows = table(1..=20, &eps, &Scalar::one(), &NormKind::ALL, 30).map_err(|e| e.to_string())?;
        for row in &rows {
            let d = row.d;
            let label = format!("d={d} {} ε={eps}", row.norm.name());
            match row.norm {
                NormKind::LInf => {
                    let want = (Scalar::one() + Scalar::from(2) * &eps).powi(d as u32);
                    ensure(row.exact_value.as_ref() == Some(&want), || {
                        format!("{label}: exact value")
                    })?;
                    ensure(row.k == ceil_pow(&(Scalar::one() + Scalar::from(2) * &eps), d), || {
                        format!("{label}: k")
                    })?;
                }
                NormKind::L1 | NormKind::L2 => {
                    let want = oracle_value(row.norm, d, &eps);
                    ensure(matches_30_digits(&row.value, &want), || {
                        format!(
                            "{label}: shown {} vs oracle {}",
                            row.value,
                            Scalar::from_rational(want.clone()).to_decimal(35)
                        )
                    })?;
                    let k = want.ceil().to_integer().to_biguint().unwrap();
                    ensure(row.k == k, || format!("{label}: k {} vs {k}", row.k))?;
                    if let Some(v) = &row.exact_value {
                        ensure(v.as_rational() == &want, || format!("{label}: exact value"))?;
                    }
                }
            }
            rows_checked += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..1000 {
        let d = rng.random_range(1..=40usize);
        let eps = q(rng.random_range(1..=400), rng.random_range(1..=200));
        let a = lower_bound_k_measure(d, &eps, &Scalar::one(), NormKind::LInf).unwrap();
        let b = lower_bound_k_diameter(d, &eps, &Scalar::one()).unwrap();
        ensure(a == b, || format!("pair {i} (d={d}, ε={eps}): {a} vs {b}"))?;
    }
    let sample = table([20], &q(1, 4), &Scalar::one(), &[NormKind::L1, NormKind::L2], 12).unwrap();
    let stirling: Vec<String> = sample
        .iter()
        .map(|r| format!("{} {} ≈ {:.6}", r.norm.name(), r.value, r.approx.unwrap_or(f64::NAN)))
        .collect();
    Ok(format!(
        "{rows_checked} rows; 1000 consistency pairs; d=20 ε=1/4 Stirling (display only): {}",
        stirling.join(", ")
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("grid tightness", grid_tightness),
        ("layered certification", layered_certification),
        ("lower-bound witness sweep", witness_sweep),
        ("gluing", gluing),
        ("depth identities", depth_identities),
        ("neighborhood sperner", sperner),
        ("universal rounding", universal_rounding),
        ("no-free-lunch demo", nfl_demo),
        ("bounds table", bounds_table),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} ({name}): PASS [{secs:.2}s] {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL [{secs:.2}s] {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
