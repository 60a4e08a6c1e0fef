use std::path::Path;

use nalgebra::DVector;
use serde_json::json;

use framesym::bodypin::{
    analyze_body, body_counts_with_tolerance, body_fowler_guest_with_tolerance,
    body_reflection_checks, body_symmetry_group, body_symmetry_residuals, derive_from_partition,
    flex_transfer, BodyFramework,
};
use framesym::characters::{classify_element, cycle_notation};
use framesym::characters::{
    fowler_guest_table_with_tolerance, isostatic_necessary_checks, subframework_audit,
    CharacterTable, Scope, SubgraphSelection,
};
use framesym::io::{
    parse_body, parse_framework, parse_partition, parse_point_line, parse_vertex_sets, PeriodicFile,
};
use framesym::periodic::{
    analyze_periodic, detect_point_group, periodic_audit, periodic_counts_with_tolerance,
    periodic_fowler_guest_with_tolerance, periodic_symmetry_residuals,
};
use framesym::pointline::{
    pointline_audit, pointline_fowler_guest_with_tolerance, pointline_symmetry_group,
};
use framesym::rigidity::{analyze_grounded, analyze_with_tolerance, RigidityAnalysis};
use framesym::symmetry::{spatial_symmetry_group, verify_symmetry_equation, SymmetryGroup};
use framesym::{Framework, VertexId};

use crate::output::{fmt, matrix_columns, matrix_rows, Report};
use crate::{Cli, Command};

type Outcome<T> = Result<T, String>;

fn read(path: &Path) -> Outcome<String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn at<T>(path: &Path, r: framesym::Result<T>) -> Outcome<T> {
    r.map_err(|e| format!("{}: {e}", path.display()))
}

fn lib<T>(r: framesym::Result<T>) -> Outcome<T> {
    r.map_err(|e| e.to_string())
}

fn reject_framework_flags(cli: &Cli, name: &str) -> Outcome<()> {
    let used = [
        ("--subgraphs", cli.subgraphs.is_some()),
        ("--enumerate", cli.enumerate.is_some()),
        ("--partition", cli.partition.is_some()),
    ];
    match used.iter().find(|(_, on)| *on) {
        Some((flag, _)) => Err(format!(
            "{flag} applies to bar-joint frameworks, not to `{name}`"
        )),
        None => Ok(()),
    }
}

pub fn run(cli: &Cli) -> Outcome<Report> {
    if !(cli.tol.is_finite() && cli.tol >= 0.0) {
        return Err(format!(
            "--tol must be finite and nonnegative, got {}",
            cli.tol
        ));
    }
    match &cli.command {
        Command::Analyze { input } => framework_command(cli, input, Mode::Analyze),
        Command::Symmetry { input } => framework_command(cli, input, Mode::Symmetry),
        Command::Characters { input } => framework_command(cli, input, Mode::Characters),
        Command::Audit { input } => framework_command(cli, input, Mode::Audit),
        Command::Pointline { input } => {
            reject_framework_flags(cli, "pointline")?;
            pointline_command(cli, input)
        }
        Command::Body { input } => {
            reject_framework_flags(cli, "body")?;
            body_command(cli, input)
        }
        Command::Periodic { input } => {
            reject_framework_flags(cli, "periodic")?;
            periodic_command(cli, input)
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Analyze,
    Symmetry,
    Characters,
    Audit,
}

fn analysis_summary(report: &mut Report, a: &RigidityAnalysis, emit_flexes: bool) {
    report.put(
        "analysis",
        json!({
            "rank": a.rank,
            "kernel_dim": a.flex_basis.dim(),
            "rigid_dim": a.rigid_basis.dim(),
            "mechanisms": a.mechanisms,
            "stresses": a.stresses,
            "infinitesimally_rigid": a.infinitesimally_rigid,
            "isostatic": a.isostatic,
        }),
    );
    report.line(format!(
        "rank {}, kernel {} (rigid {}), mechanisms m = {}, self-stresses s = {}",
        a.rank,
        a.flex_basis.dim(),
        a.rigid_basis.dim(),
        a.mechanisms,
        a.stresses
    ));
    report.line(if a.isostatic {
        "isostatic"
    } else if a.infinitesimally_rigid {
        "infinitesimally rigid, not isostatic"
    } else {
        "not infinitesimally rigid"
    });
    if emit_flexes {
        report.put("flexes", matrix_columns(a.mechanism_basis.columns()));
        report.line(format!(
            "{} mechanism vectors emitted (json only)",
            a.mechanisms
        ));
    }
}

fn require_isostatic(cli: &Cli, report: &mut Report, isostatic: bool) {
    if cli.require_isostatic && !isostatic {
        report.line("required isostatic: no");
        report.fail();
    }
}

fn group_listing(
    report: &mut Report,
    group: &SymmetryGroup,
    ids: &[VertexId],
    residuals: &[f64],
) -> Outcome<()> {
    let mut elements = Vec::new();
    report.line(format!("symmetry group of order {}", group.order()));
    for (k, g) in group.elements().iter().enumerate() {
        let kind = lib(classify_element(&g.orthogonal))?;
        let cycles = cycle_notation(&g.sigma, ids);
        report.line(format!(
            "  g{k} {cycles}: {kind}, equation residual {}",
            fmt(residuals[k])
        ));
        elements.push(json!({
            "index": k,
            "cycles": cycles,
            "kind": kind,
            "orthogonal": matrix_rows(&g.orthogonal),
            "translation": g.translation.iter().copied().collect::<Vec<_>>(),
            "fit_residual": g.residual,
            "equation_residual": residuals[k],
        }));
    }
    report.put(
        "group",
        json!({ "order": group.order(), "elements": elements }),
    );
    Ok(())
}

fn character_lines(report: &mut Report, table: &CharacterTable) {
    report.line("characters (m_g - s_g = j*tr(S) - b - tr(rig)):");
    for r in &table.rows {
        report.line(format!(
            "  g{} {} [{}]: j={} b={} tr(S)={} tr(rig)={} | m_g={} s_g={} rhs={}",
            r.element,
            r.cycles,
            r.kind,
            r.j,
            r.b,
            fmt(r.tr_sp),
            fmt(r.tr_rig),
            fmt(r.mech),
            fmt(r.stress),
            fmt(r.rhs)
        ));
    }
    report.line(format!(
        "max balance residual {}",
        fmt(table.max_balance_residual())
    ));
    report.put("characters", table);
    report.put("max_balance_residual", table.max_balance_residual());
}

fn framework_command(cli: &Cli, input: &Path, mode: Mode) -> Outcome<Report> {
    let fw = at(input, parse_framework(&read(input)?))?;
    let mut report = Report::new("framework");
    let grounded = !fw.graph().pinned().is_empty();
    report.put(
        "framework",
        json!({
            "dimension": fw.dimension(),
            "vertices": fw.vertex_count(),
            "edges": fw.edge_count(),
            "pinned": fw.graph().pinned(),
        }),
    );
    report.line(format!(
        "framework: d = {}, v = {}, e = {}{}",
        fw.dimension(),
        fw.vertex_count(),
        fw.edge_count(),
        if grounded { ", grounded" } else { "" }
    ));
    let analysis = if grounded {
        lib(analyze_grounded(&fw, cli.tol))?
    } else {
        lib(analyze_with_tolerance(&fw, cli.tol))?
    };
    analysis_summary(&mut report, &analysis, cli.emit_flexes);
    require_isostatic(cli, &mut report, analysis.isostatic);
    let needs_group = mode != Mode::Analyze || cli.audit;
    let group = if needs_group {
        Some(lib(spatial_symmetry_group(&fw))?)
    } else {
        None
    };
    if let Some(group) = &group {
        if matches!(mode, Mode::Symmetry) {
            let residuals = lib(verify_symmetry_equation(&fw, group))?;
            group_listing(&mut report, group, fw.graph().vertex_ids(), &residuals)?;
            report.put("conjugacy_classes", group.conjugacy_classes());
        }
        if matches!(mode, Mode::Characters) {
            let table = lib(fowler_guest_table_with_tolerance(&fw, group, cli.tol))?;
            character_lines(&mut report, &table);
        }
        if matches!(mode, Mode::Audit) || cli.audit {
            report.audit(
                "audit",
                "necessary conditions",
                &isostatic_necessary_checks(&fw, group),
            );
        }
    }
    let selection = match (&cli.subgraphs, cli.enumerate) {
        (Some(path), _) => Some(SubgraphSelection::Explicit(at(
            path,
            parse_vertex_sets(&read(path)?),
        )?)),
        (None, Some(max)) => Some(SubgraphSelection::Enumerate { max_vertices: max }),
        (None, None) => None,
    };
    if let Some(selection) = selection {
        let sub = lib(subframework_audit(&fw, &selection))?;
        report.audit("subframework_audit", "subframework bounds", &sub);
    }
    if let Some(path) = &cli.partition {
        let partition = at(path, parse_partition(&read(path)?))?;
        partition_section(cli, &mut report, &fw, &partition)?;
    }
    Ok(report)
}

fn partition_section(
    cli: &Cli,
    report: &mut Report,
    fw: &Framework,
    partition: &framesym::VertexPartition,
) -> Outcome<()> {
    let derived = lib(derive_from_partition(fw, partition))?;
    let bf = &derived.body;
    let counts = lib(body_counts_with_tolerance(bf, cli.tol))?;
    report.line(format!(
        "derived body framework: {} pins, {} bodies ({} from bars), {} memberships, kernel {}",
        bf.pin_count(),
        bf.body_count(),
        derived.bar_bodies.iter().filter(|&&b| b).count(),
        bf.membership_count(),
        counts.kernel_dim
    ));
    let mut transferred = Vec::new();
    let analysis = lib(analyze_body(bf, cli.tol))?;
    for col in analysis.mechanism_basis.columns().column_iter() {
        let flex = DVector::from_iterator(col.len(), col.iter().copied());
        let u = lib(flex_transfer(&derived, &flex))?;
        let r = lib(framesym::rigidity::rigidity_matrix_with_tolerance(
            fw, cli.tol,
        ))?;
        let norm = u.norm();
        let relative = if norm > 0.0 {
            (r.entries() * &u).norm() / norm
        } else {
            0.0
        };
        report.line(format!(
            "  transferred mechanism: |R u| / |u| = {}",
            fmt(relative)
        ));
        transferred.push(json!({ "velocities": u.iter().copied().collect::<Vec<_>>(), "relative_residual": relative }));
    }
    report.put(
        "partition",
        json!({
            "pins": bf.pin_ids(),
            "bodies": bf.bodies(),
            "bar_bodies": derived.bar_bodies,
            "counts": counts,
            "transferred_flexes": transferred,
        }),
    );
    report.audit(
        "partition_audit",
        "derived body framework",
        &lib(derived.audit())?,
    );
    Ok(())
}

fn pointline_command(cli: &Cli, input: &Path) -> Outcome<Report> {
    let sys = at(input, parse_point_line(&read(input)?))?;
    let mut report = Report::new("point-line");
    report.put(
        "system",
        json!({
            "points": sys.point_count(),
            "lines": sys.line_count(),
            "constraints": sys.constraints().len(),
        }),
    );
    report.line(format!(
        "point-line system: {} points, {} lines, {} constraints",
        sys.point_count(),
        sys.line_count(),
        sys.constraints().len()
    ));
    let analysis = lib(sys
        .centered()
        .and_then(|c| c.analyze_with_tolerance(cli.tol)))?;
    analysis_summary(&mut report, &analysis, cli.emit_flexes);
    require_isostatic(cli, &mut report, analysis.isostatic);
    let group = lib(pointline_symmetry_group(&sys))?;
    let residuals = lib(framesym::pointline::pointline_symmetry_residuals(
        &sys, &group,
    ))?;
    group_listing(&mut report, &group, &sys.object_ids(), &residuals)?;
    let table = lib(pointline_fowler_guest_with_tolerance(&sys, &group, cli.tol))?;
    character_lines(&mut report, &table);
    if cli.audit {
        report.audit(
            "audit",
            "necessary conditions",
            &lib(pointline_audit(&sys, &group))?,
        );
    }
    Ok(report)
}

fn body_command(cli: &Cli, input: &Path) -> Outcome<Report> {
    let bf: BodyFramework = at(input, parse_body(&read(input)?))?;
    let mut report = Report::new("body");
    let counts = lib(body_counts_with_tolerance(&bf, cli.tol))?;
    report.line(format!(
        "body framework: {} pins, {} bodies, {} memberships",
        counts.pins, counts.bodies, counts.memberships
    ));
    report.line(format!(
        "rows 2c = {}, 2n + 3e - 3 = {}, rank {}, kernel {}, self-stresses {}",
        counts.rows, counts.free_dof, counts.rank, counts.kernel_dim, counts.stresses
    ));
    report.line(if counts.isostatic {
        "isostatic"
    } else {
        "not isostatic"
    });
    report.put("counts", &counts);
    if cli.emit_flexes {
        let a = lib(analyze_body(&bf, cli.tol))?;
        report.put("flexes", matrix_columns(a.mechanism_basis.columns()));
    }
    require_isostatic(cli, &mut report, counts.isostatic);
    let group = lib(body_symmetry_group(&bf))?;
    let residuals = lib(body_symmetry_residuals(&bf, &group))?;
    let table = lib(body_fowler_guest_with_tolerance(&bf, &group, cli.tol))?;
    report.line(format!("symmetry group of order {}", group.order()));
    report.line("characters (m_g - s_g = tr(S+) n_body + tr(S) n_pin - tr(S) c - tr(rig)):");
    for (r, res) in table.rows.iter().zip(&residuals) {
        report.line(format!(
            "  g{} {} [{}]: n_pin={} n_body={} c={} tr(S)={} tr(S+)={} tr(rig)={} | m_g={} s_g={} rhs={} (equation residual {})",
            r.element,
            r.cycles,
            r.kind,
            r.fixed_pins,
            r.fixed_bodies,
            r.fixed_memberships,
            fmt(r.tr_sp),
            fmt(r.tr_sp_plus),
            fmt(r.tr_rig),
            fmt(r.mech),
            fmt(r.stress),
            fmt(r.rhs),
            fmt(*res)
        ));
    }
    report.line(format!(
        "max balance residual {}",
        fmt(table.max_balance_residual())
    ));
    report.put("characters", &table.rows);
    report.put("equation_residuals", &residuals);
    report.put("max_balance_residual", table.max_balance_residual());
    if cli.audit {
        let two_pin: Vec<bool> = bf.bodies().iter().map(|b| b.len() == 2).collect();
        report.audit(
            "audit",
            "necessary conditions",
            &body_reflection_checks(&bf, &group, Scope::Framework, &two_pin),
        );
    }
    Ok(report)
}

fn periodic_command(cli: &Cli, input: &Path) -> Outcome<Report> {
    let file = at(input, PeriodicFile::from_json(&read(input)?))?;
    let pf = at(input, file.to_framework())?;
    let mut report = Report::new("periodic");
    let counts = lib(periodic_counts_with_tolerance(&pf, cli.tol))?;
    report.line(format!(
        "periodic framework: d = {}, |V_p| = {}, |E_p| = {}",
        pf.dimension(),
        counts.vertex_orbits,
        counts.edge_orbits
    ));
    report.line(format!(
        "rank {}, kernel {}, periodic mechanisms m_p = {}, periodic stresses s_p = {}, d|V_p| - |E_p| - d = {}",
        counts.rank, counts.kernel_dim, counts.m_p, counts.s_p, counts.maxwell
    ));
    report.put("counts", &counts);
    if cli.emit_flexes {
        let a = lib(analyze_periodic(&pf, cli.tol))?;
        report.put("flexes", matrix_columns(a.mechanism_basis.columns()));
    }
    require_isostatic(cli, &mut report, counts.m_p == 0 && counts.s_p == 0);
    let group = match at(input, file.point_group(&pf))? {
        Some(g) => g,
        None => lib(detect_point_group(&pf))?,
    };
    let residuals = periodic_symmetry_residuals(&pf, &group);
    let table = lib(periodic_fowler_guest_with_tolerance(&pf, &group, cli.tol))?;
    report.line(format!("point group of order {}", group.order()));
    report.line("characters (m_g - s_g = j*tr(S) - b - tr(rig)):");
    let mut elements = Vec::new();
    for ((r, g), res) in table.rows.iter().zip(group.elements()).zip(&residuals) {
        report.line(format!(
            "  g{} {} [{}] t=({}): j={} b={} tr(S)={} tr(rig)={} | m_g={} s_g={} rhs={} (equation residual {})",
            r.element,
            r.cycles,
            r.kind,
            r.translation.iter().map(|x| fmt(*x)).collect::<Vec<_>>().join(", "),
            r.fixed_vertex_orbits,
            r.fixed_edge_orbits,
            fmt(r.tr_sp),
            fmt(r.tr_rig),
            fmt(r.mech),
            fmt(r.stress),
            fmt(r.rhs),
            fmt(*res)
        ));
        elements.push(json!({
            "orthogonal": matrix_rows(&g.orthogonal),
            "translation": g.translation.iter().copied().collect::<Vec<_>>(),
            "lattice_map": g.lattice_map.row_iter().map(|r| r.iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>(),
            "equation_residual": res,
        }));
    }
    report.line(format!(
        "max balance residual {}",
        fmt(table.max_balance_residual())
    ));
    report.put("point_group", elements);
    report.put("characters", &table.rows);
    report.put("max_balance_residual", table.max_balance_residual());
    if cli.audit {
        report.audit(
            "audit",
            "necessary conditions",
            &periodic_audit(&pf, &group),
        );
    }
    Ok(report)
}
