//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test -p framesym --test acceptance`.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use framesym::bodypin::{
    analyze_body, body_counts, body_fowler_guest, body_reflection_checks, body_symmetry_group,
    derive_from_partition, flex_transfer, BodyFramework,
};
use framesym::characters::{fowler_guest_table, isostatic_necessary_checks, AuditReport, Scope};
use framesym::io::{parse_framework, parse_partition};
use framesym::periodic::{
    detect_point_group, periodic_counts, periodic_fowler_guest, PeriodicFramework, PointGroup,
};
use framesym::pointline::{pointline_audit, pointline_symmetry_group};
use framesym::rigidity::{analyze, rigidity_matrix};
use framesym::symmetry::{spatial_symmetry_group, verify_symmetry_equation, Permutation};
use framesym::Framework;

use common::*;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn check<'a>(report: &'a AuditReport, rule: &str) -> Vec<&'a framesym::characters::AuditCheck> {
    report.checks.iter().filter(|c| c.rule == rule).collect()
}

fn random_corpus() -> Vec<Framework> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..100)
        .map(|_| random_mirror_framework(&mut rng, 8))
        .collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let fw = parse_framework(&read_fixture("figure2.json")).map_err(err)?;
    let a = analyze(&fw).map_err(err)?;
    let elapsed = start.elapsed().as_secs_f64();
    ensure(a.mechanisms == 1, format!("m = {}", a.mechanisms))?;
    ensure(a.stresses == 0, format!("s = {}", a.stresses))?;
    ensure(
        a.flex_basis.dim() == 4,
        format!("kernel dimension {}", a.flex_basis.dim()),
    )?;
    ensure(elapsed < 1.0, format!("took {elapsed:.3} s"))?;
    Ok(format!(
        "m = 1, s = 0, dim ker = 4 in {:.1} ms",
        1e3 * elapsed
    ))
}

fn criterion_2(corpus: &[Framework]) -> Outcome {
    let fw = framework("figure2.json");
    let group = spatial_symmetry_group(&fw).map_err(err)?;
    ensure(group.order() == 4, format!("group order {}", group.order()))?;
    let fig = verify_symmetry_equation(&fw, &group)
        .map_err(err)?
        .into_iter()
        .fold(0.0, f64::max);
    ensure(fig < 1e-10, format!("figure residual {fig:e}"))?;
    let mut worst: f64 = 0.0;
    for (k, fw) in corpus.iter().enumerate() {
        let group = spatial_symmetry_group(fw).map_err(err)?;
        ensure(
            group.order() >= 2,
            format!("random framework {k} lost its mirror"),
        )?;
        for r in verify_symmetry_equation(fw, &group).map_err(err)? {
            worst = worst.max(r);
        }
    }
    ensure(worst < 1e-10, format!("random residual {worst:e}"))?;
    Ok(format!(
        "figure 2 max residual {fig:.1e} over 4 elements; {} mirror frameworks max {worst:.1e}",
        corpus.len()
    ))
}

fn criterion_3(corpus: &[Framework]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut rows = 0;
    let mut frameworks: Vec<(String, Framework)> = BAR_JOINT_FIXTURES
        .iter()
        .map(|n| (n.to_string(), framework(n)))
        .collect();
    frameworks.extend(
        corpus
            .iter()
            .enumerate()
            .map(|(k, f)| (format!("random {k}"), f.clone())),
    );
    for (name, fw) in &frameworks {
        let group = spatial_symmetry_group(fw).map_err(err)?;
        let table = fowler_guest_table(fw, &group).map_err(|e| format!("{name}: {e}"))?;
        worst = worst.max(table.max_balance_residual());
        rows += table.rows.len();
        let identity = table
            .rows
            .iter()
            .find(|r| r.element == 0)
            .ok_or("missing identity row")?;
        let a = analyze(fw).map_err(err)?;
        let (m, s) = (a.mechanisms as i64, a.stresses as i64);
        let count = if table.grounded {
            (fw.dimension() * (fw.vertex_count() - fw.graph().pinned().len())) as i64
                - fw.edge_count() as i64
        } else {
            (fw.dimension() * fw.vertex_count()) as i64
                - fw.edge_count() as i64
                - a.rigid_basis.dim() as i64
        };
        if !table.grounded {
            ensure(
                m - s == count,
                format!("{name}: m - s = {} but count = {count}", m - s),
            )?;
        }
        ensure(
            identity.rhs == count as f64,
            format!("{name}: identity rhs {} vs count {count}", identity.rhs),
        )?;
    }
    let figure1 = point_line("figure1_pointline.json");
    let pl = framesym::pointline::pointline_fowler_guest(
        &figure1,
        &pointline_symmetry_group(&figure1).map_err(err)?,
    )
    .map_err(err)?;
    worst = worst.max(pl.max_balance_residual());
    rows += pl.rows.len();
    ensure(worst < 1e-8, format!("balance residual {worst:e}"))?;
    Ok(format!(
        "{} frameworks, {rows} elements, max balance residual {worst:.1e}; identity rows equal the Maxwell count",
        frameworks.len() + 1
    ))
}

fn half_turn_report(name: &str) -> Result<(bool, f64, bool), String> {
    let fw = framework(name);
    let group = spatial_symmetry_group(&fw).map_err(err)?;
    let report = isostatic_necessary_checks(&fw, &group);
    let turns = check(&report, "half-turn-3d");
    ensure(!turns.is_empty(), format!("{name}: no half-turn found"))?;
    let c = turns[0];
    let (j, b) = (c.counts["j"], c.counts["b"]);
    let value = 2.0 - j - b;
    ensure(
        value == c.value,
        format!("{name}: reported {} vs 2 - j - b = {value}", c.value),
    )?;
    let isostatic = analyze(&fw).map_err(err)?.isostatic;
    Ok((turns.iter().all(|c| c.satisfied), value, isostatic))
}

fn criterion_4() -> Outcome {
    let (ok, value, iso) = half_turn_report("prism_half_turn.json")?;
    ensure(iso, "symmetric prism is not isostatic by rank")?;
    ensure(ok && value == 0.0, format!("prism half-turn count {value}"))?;
    let (bad_ok, bad_value, bad_iso) = half_turn_report("prism_half_turn_violating.json")?;
    ensure(
        !bad_ok && bad_value != 0.0,
        "violating fixture passed the half-turn check",
    )?;
    ensure(!bad_iso, "violating fixture is isostatic by rank")?;
    Ok(format!(
        "prism: 2 - j - b = 0 and isostatic; violating prism: 2 - j - b = {bad_value}, not isostatic"
    ))
}

fn criterion_5() -> Outcome {
    let sys = point_line("figure1_pointline.json");
    let group = pointline_symmetry_group(&sys).map_err(err)?;
    let report = pointline_audit(&sys, &group).map_err(err)?;
    let count = check(&report, "pointline-count");
    ensure(
        count.len() == 1 && count[0].value == 0.0,
        "identity count is not 0",
    )?;
    let c = count[0];
    ensure(
        (c.counts["v"], c.counts["e"], c.counts["rig"]) == (6.0, 9.0, 3.0),
        format!("v, e, rig = {:?}", c.counts),
    )?;
    let refl = check(&report, "pointline-reflection");
    ensure(!refl.is_empty(), "no reflection found")?;
    for r in &refl {
        let b = r.counts["b_pp"] + r.counts["b_pl"] + r.counts["b_ll"];
        ensure(b == 3.0, format!("reflection fixes {b} constraints"))?;
        ensure(
            !r.satisfied && r.value == -2.0,
            "reflection rule did not flag the system",
        )?;
    }
    let a = sys.analyze().map_err(err)?;
    ensure(
        a.flex_basis.dim() >= 4 && a.mechanisms > 0,
        format!("dim ker = {}", a.flex_basis.dim()),
    )?;
    Ok(format!(
        "2*6 - 9 - 3 = 0; reflection fixes 3 constraints, 1 - 3 != 0 flagged; dim ker = {}",
        a.flex_basis.dim()
    ))
}

fn criterion_6() -> Outcome {
    let pins = [
        (1, [0.0, 0.0]),
        (2, [2.0, 4.0]),
        (3, [5.0, 1.0]),
        (4, [-3.0, 2.5]),
    ];
    let bf =
        BodyFramework::new(pins, vec![vec![1, 2], vec![2, 3, 4], vec![3, 4, 1]]).map_err(err)?;
    let r = bf.rigidity_entries();
    for (k, &(i, e)) in bf.memberships().iter().enumerate() {
        let p = pins[i].1;
        let members: Vec<[f64; 2]> = bf.bodies()[e]
            .iter()
            .map(|id| pins.iter().find(|(q, _)| q == id).unwrap().1)
            .collect();
        let len = members.len() as f64;
        let c = [
            members.iter().map(|m| m[0]).sum::<f64>() / len,
            members.iter().map(|m| m[1]).sum::<f64>() / len,
        ];
        let col = 2 * bf.pin_count() + 3 * e;
        let got = [
            [
                r[(2 * k, 2 * i)],
                r[(2 * k, 2 * i + 1)],
                r[(2 * k, col)],
                r[(2 * k, col + 1)],
                r[(2 * k, col + 2)],
            ],
            [
                r[(2 * k + 1, 2 * i)],
                r[(2 * k + 1, 2 * i + 1)],
                r[(2 * k + 1, col)],
                r[(2 * k + 1, col + 1)],
                r[(2 * k + 1, col + 2)],
            ],
        ];
        let want = [
            [1.0, 0.0, -1.0, 0.0, -(p[1] - c[1])],
            [0.0, 1.0, 0.0, -1.0, p[0] - c[0]],
        ];
        ensure(
            got == want,
            format!(
                "block for pin {} in body {e}: {got:?} vs {want:?}",
                pins[i].0
            ),
        )?;
        let nonzero = (0..r.ncols())
            .filter(|&col| r[(2 * k, col)] != 0.0 || r[(2 * k + 1, col)] != 0.0)
            .count();
        ensure(nonzero <= 5, "entries outside the 2 x 5 block")?;
    }
    let ring = body("body_ring.json");
    let counts = body_counts(&ring).map_err(err)?;
    ensure(
        counts.stresses == 1,
        format!("ring s = {}", counts.stresses),
    )?;
    let mut worst: f64 = 0.0;
    let mut reflections = 0;
    for name in BODY_FIXTURES {
        let bf = body(name);
        let group = body_symmetry_group(&bf).map_err(err)?;
        worst = worst.max(
            body_fowler_guest(&bf, &group)
                .map_err(err)?
                .max_balance_residual(),
        );
        let bars: Vec<bool> = bf.bodies().iter().map(|b| b.len() == 2).collect();
        let report = body_reflection_checks(&bf, &group, Scope::Framework, &bars);
        let isostatic = analyze_body(&bf, 1e-8).map_err(err)?.isostatic;
        for c in check(&report, "body-reflection") {
            reflections += 1;
            ensure(
                c.satisfied == (c.counts["fixed_bodies"] == 1.0),
                "reflection check disagrees with its count",
            )?;
            ensure(
                !isostatic || c.satisfied,
                format!(
                    "{name}: isostatic but reflection fixes {}",
                    c.counts["fixed_bodies"]
                ),
            )?;
        }
    }
    ensure(worst < 1e-8, format!("body balance residual {worst:e}"))?;
    ensure(reflections > 0, "no reflection evaluated")?;
    Ok(format!(
        "2 x 5 blocks bit-exact; ring s = 1; body balance max {worst:.1e}; {reflections} reflection checks enforced"
    ))
}

fn criterion_7() -> Outcome {
    let fw = framework("two_k4_two_bars.json");
    let partition =
        parse_partition(&read_fixture("two_k4_two_bars.partition.json")).map_err(err)?;
    let derived = derive_from_partition(&fw, &partition).map_err(err)?;
    let report = derived.audit().map_err(err)?;
    let refl = check(&report, "body-reflection");
    ensure(!refl.is_empty(), "derived framework has no reflection")?;
    let two = refl
        .iter()
        .find(|c| c.counts["fixed_bodies"] == 2.0)
        .ok_or("no reflection fixes 2 bodies")?;
    ensure(!two.satisfied && !report.passed(), "check did not fail")?;
    let a = analyze_body(&derived.body, 1e-8).map_err(err)?;
    ensure(
        a.mechanism_basis.dim() > 0,
        "derived body framework has no mechanism",
    )?;
    let r = rigidity_matrix(&fw).map_err(err)?.into_entries();
    let mut worst: f64 = 0.0;
    for k in 0..a.mechanism_basis.dim() {
        let flex: DVector<f64> = a.mechanism_basis.columns().column(k).into_owned();
        let u = flex_transfer(&derived, &flex).map_err(err)?;
        ensure(u.norm() > 0.0, "transferred flex vanished")?;
        worst = worst.max((&r * &u).norm() / u.norm());
    }
    ensure(worst < 1e-8, format!("|R u| / |u| = {worst:e}"))?;
    Ok(format!(
        "mirror fixes 2 bodies, check fails; transferred flexes |R u| / |u| <= {worst:.1e}"
    ))
}

fn periodic_balance(pf: &PeriodicFramework, group: &PointGroup) -> Result<f64, String> {
    let counts = periodic_counts(pf).map_err(err)?;
    ensure(
        counts.m_p as i64 - counts.s_p as i64 == counts.maxwell,
        format!(
            "m_p - s_p = {} vs {}",
            counts.m_p as i64 - counts.s_p as i64,
            counts.maxwell
        ),
    )?;
    Ok(periodic_fowler_guest(pf, group)
        .map_err(err)?
        .max_balance_residual())
}

fn criterion_8() -> Outcome {
    let (square, _) = periodic("periodic_square.json");
    let counts = periodic_counts(&square).map_err(err)?;
    ensure(
        (counts.m_p, counts.s_p, counts.maxwell) == (0, 2, -2),
        format!(
            "square grid m_p, s_p, count = {}, {}, {}",
            counts.m_p, counts.s_p, counts.maxwell
        ),
    )?;
    let mut worst: f64 = 0.0;
    let mut elements = 0;
    for name in PERIODIC_FIXTURES {
        let (pf, file) = periodic(name);
        let group = match file.point_group(&pf).map_err(err)? {
            Some(g) => g,
            None => detect_point_group(&pf).map_err(err)?,
        };
        elements += group.order();
        worst = worst.max(periodic_balance(&pf, &group)?);
        let doubled = pf.supercell(2).map_err(err)?;
        let doubled_group = detect_point_group(&doubled).map_err(err)?;
        elements += doubled_group.order();
        worst = worst.max(periodic_balance(&doubled, &doubled_group)?);
    }
    ensure(worst < 1e-8, format!("periodic balance residual {worst:e}"))?;
    Ok(format!(
        "square grid m_p = 0, s_p = 2, 2|V| - |E| - 2 = -2; {elements} elements incl. doubled periods, max residual {worst:.1e}"
    ))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mirror = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
    let (mut graphs, mut worst_jac, mut worst_bal): (usize, f64, f64) = (0, 0.0, 0.0);
    for n in 2..=5 {
        for edges in connected_graphs(n) {
            let invs = involutions(n, &edges);
            let sigma = (!invs.is_empty()).then(|| invs[rng.random_range(0..invs.len())].clone());
            let points = match &sigma {
                Some(s) => symmetrized_points(s, &mut rng),
                None => (0..n)
                    .map(|_| vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)])
                    .collect(),
            };
            let fw = Framework::new(
                2,
                points
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (i as i64 + 1, p.clone())),
                edges.iter().map(|&(a, b)| (a as i64 + 1, b as i64 + 1)),
            );
            let lib = rigidity_matrix(&fw).map_err(err)?.into_entries();
            let fd = finite_difference_rigidity(2, &points, &edges, 1e-5);
            worst_jac = worst_jac.max((&lib - &fd).amax());
            let group = spatial_symmetry_group(&fw).map_err(err)?;
            let table = fowler_guest_table(&fw, &group).map_err(err)?;
            let mut elements = vec![((0..n).collect::<Vec<_>>(), DMatrix::identity(2, 2))];
            elements.extend(sigma.map(|s| (s, mirror.clone())));
            for (s, orth) in elements {
                let row = oracle_planar_row(&points, &edges, &s, &orth);
                worst_bal = worst_bal.max((row.mech - row.stress - row.rhs).abs());
                let k = group
                    .position(&Permutation::from_images(s.clone()).unwrap())
                    .ok_or_else(|| format!("{edges:?}: symmetry {s:?} not detected"))?;
                let lib_row = table
                    .rows
                    .iter()
                    .find(|r| r.element == k)
                    .ok_or("missing row")?;
                ensure(
                    (lib_row.mech - row.mech).abs() < 1e-8
                        && (lib_row.stress - row.stress).abs() < 1e-8,
                    format!("{edges:?}: library traces differ from oracle"),
                )?;
            }
            graphs += 1;
        }
    }
    ensure(worst_jac < 1e-6, format!("Jacobian mismatch {worst_jac:e}"))?;
    ensure(
        worst_bal < 1e-8,
        format!("oracle balance residual {worst_bal:e}"),
    )?;
    Ok(format!(
        "{graphs} connected graphs on <= 5 vertices: Jacobian vs finite differences {worst_jac:.1e}, projected-trace balance {worst_bal:.1e}"
    ))
}

fn main() -> ExitCode {
    let corpus = random_corpus();
    let results: Vec<(usize, Outcome)> = vec![
        (1, criterion_1()),
        (2, criterion_2(&corpus)),
        (3, criterion_3(&corpus)),
        (4, criterion_4()),
        (5, criterion_5()),
        (6, criterion_6()),
        (7, criterion_7()),
        (8, criterion_8()),
        (9, criterion_9()),
    ];
    let mut failed = 0;
    for (k, outcome) in &results {
        match outcome {
            Ok(detail) => println!("criterion {k}: PASS: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {k}: FAIL: {detail}");
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
