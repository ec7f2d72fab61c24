use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{io_err, sha256_hex, CellResult, ExperimentPlan, HarnessError, Level, ProgramOutcome};
use crate::exec_cov::Criterion;
use crate::stats::DESIRED_CL;

fn two(v: f64) -> String {
    format!("{v:.2}")
}

fn full(v: f64) -> String {
    v.to_string()
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), HarnessError> {
    let csv_err = |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

const SUMMARY_HEADER: [&str; 8] = [
    "criterion",
    "level",
    "target",
    "ga_mean",
    "ga_std",
    "rnd_mean",
    "rnd_std",
    "actual_cl",
];

const PER_PROGRAM_HEADER: [&str; 5] = [
    "criterion",
    "level",
    "program",
    "ga_coverage",
    "rnd_coverage",
];

/// Writes `summary.csv`, `per_program.csv` and their full-precision
/// `*_raw.csv` twins.
pub fn emit_csv(cells: &[CellResult], run_dir: &Path) -> Result<(), HarnessError> {
    let summary = |fmt: fn(f64) -> String| -> Vec<Vec<String>> {
        cells
            .iter()
            .map(|c| {
                let s = &c.summary;
                vec![
                    c.criterion.to_string(),
                    c.level.to_string(),
                    c.target.value().to_string(),
                    fmt(s.ga_mean),
                    fmt(s.ga_std),
                    fmt(s.rnd_mean),
                    fmt(s.rnd_std),
                    fmt(s.actual_cl()),
                ]
            })
            .collect()
    };
    write_csv(&run_dir.join("summary.csv"), &SUMMARY_HEADER, &summary(two))?;

    let mut raw_header = SUMMARY_HEADER.to_vec();
    raw_header.extend([
        "t",
        "df",
        "p_two_sided",
        "degenerate",
        "significant",
        "programs_sha256",
    ]);
    let raw: Vec<Vec<String>> = summary(full)
        .into_iter()
        .zip(cells)
        .map(|(mut row, c)| {
            let t = &c.summary.test;
            row.extend([
                full(t.t),
                full(t.df),
                full(t.p_two_sided),
                t.degenerate.to_string(),
                c.summary.significant().to_string(),
                c.programs_sha256(),
            ]);
            row
        })
        .collect();
    write_csv(&run_dir.join("summary_raw.csv"), &raw_header, &raw)?;

    let per_program = |fmt: fn(f64) -> String| -> Vec<Vec<String>> {
        cells
            .iter()
            .flat_map(|c| {
                c.programs.iter().map(move |p| {
                    vec![
                        c.criterion.to_string(),
                        c.level.to_string(),
                        p.file.clone(),
                        fmt(p.ga_coverage),
                        fmt(p.rnd_coverage),
                    ]
                })
            })
            .collect()
    };
    write_csv(
        &run_dir.join("per_program.csv"),
        &PER_PROGRAM_HEADER,
        &per_program(two),
    )?;
    write_csv(
        &run_dir.join("per_program_raw.csv"),
        &PER_PROGRAM_HEADER,
        &per_program(full),
    )
}

const BAR_W: f64 = 14.0;
const GAP: f64 = 10.0;
const PLOT_H: f64 = 240.0;
const LEFT: f64 = 50.0;
const TOP: f64 = 40.0;
const GA_FILL: &str = "#3b6ea8";
const RND_FILL: &str = "#e08a2c";

/// Grouped bar chart of one cell: per program, GA and random coverage.
pub fn render_figure(cell: &CellResult) -> String {
    let n = cell.programs.len();
    let group = 2.0 * BAR_W + GAP;
    let width = LEFT + n as f64 * group + GAP + 20.0;
    let height = TOP + PLOT_H + 50.0;
    let base = TOP + PLOT_H;
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="{LEFT}" y="18" font-size="13">GA vs random, {} coverage, {} complexity ({})</text>"#,
        cell.criterion, cell.level, cell.target
    )
    .unwrap();
    for tick in (0..=100).step_by(20) {
        let y = base - PLOT_H * tick as f64 / 100.0;
        writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y}" x2="{}" y2="{y}" stroke="#ddd"/><text x="{}" y="{}" text-anchor="end">{tick}%</text>"##,
            width - 20.0,
            LEFT - 6.0,
            y + 4.0
        )
        .unwrap();
    }
    for (i, p) in cell.programs.iter().enumerate() {
        let x0 = LEFT + GAP + i as f64 * group;
        for (j, (technique, value, fill)) in [
            ("ga", p.ga_coverage, GA_FILL),
            ("random", p.rnd_coverage, RND_FILL),
        ]
        .into_iter()
        .enumerate()
        {
            let h = PLOT_H * value.clamp(0.0, 100.0) / 100.0;
            writeln!(
                s,
                r#"<rect class="bar" data-program="{}" data-technique="{technique}" data-coverage="{value}" x="{}" y="{}" width="{BAR_W}" height="{h}" fill="{fill}"/>"#,
                i + 1,
                x0 + j as f64 * BAR_W,
                base - h
            )
            .unwrap();
        }
        writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            x0 + BAR_W,
            base + 15.0,
            i + 1
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<line x1="{LEFT}" y1="{base}" x2="{}" y2="{base}" stroke="black"/>"#,
        width - 20.0
    )
    .unwrap();
    let ly = base + 35.0;
    writeln!(
        s,
        r#"<rect x="{LEFT}" y="{}" width="10" height="10" fill="{GA_FILL}"/><text x="{}" y="{ly}">GA</text><rect x="{}" y="{}" width="10" height="10" fill="{RND_FILL}"/><text x="{}" y="{ly}">Random</text>"#,
        ly - 9.0,
        LEFT + 14.0,
        LEFT + 50.0,
        ly - 9.0,
        LEFT + 64.0
    )
    .unwrap();
    s.push_str("</svg>\n");
    s
}

/// Writes `figures/<criterion>-<level>.svg` for every cell.
pub fn emit_figures(cells: &[CellResult], run_dir: &Path) -> Result<(), HarnessError> {
    let dir = run_dir.join("figures");
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    for c in cells {
        let path = dir.join(format!("{}-{}.svg", c.criterion, c.level));
        fs::write(&path, render_figure(c)).map_err(io_err(&path))?;
    }
    Ok(())
}

/// Rebuilds cell results from a run directory's `plan.txt`,
/// `per_program_raw.csv` and program files.
pub fn load_cells(run_dir: &Path) -> Result<Vec<CellResult>, HarnessError> {
    let plan_path = run_dir.join("plan.txt");
    let text = fs::read_to_string(&plan_path).map_err(io_err(&plan_path))?;
    let mut plan = ExperimentPlan::desk(0);
    plan.apply_text(&text)
        .map_err(|message| HarnessError::Format {
            path: plan_path.clone(),
            message,
        })?;

    let path = run_dir.join("per_program_raw.csv");
    let csv_err = |source| HarnessError::Csv {
        path: path.clone(),
        source,
    };
    let bad = |message: String| HarnessError::Format {
        path: path.clone(),
        message,
    };
    let mut reader = csv::Reader::from_path(&path).map_err(csv_err)?;
    if reader.headers().map_err(csv_err)? != PER_PROGRAM_HEADER.as_slice() {
        return Err(bad("unexpected header".into()));
    }
    let mut cells: Vec<(Criterion, Level, Vec<ProgramOutcome>)> = Vec::new();
    for (n, row) in reader.records().enumerate() {
        let row = row.map_err(csv_err)?;
        let field = |i: usize| row.get(i).unwrap_or("");
        let criterion: Criterion = field(0)
            .parse()
            .map_err(|e| bad(format!("row {}: {e}", n + 1)))?;
        let level: Level = field(1)
            .parse()
            .map_err(|e| bad(format!("row {}: {e}", n + 1)))?;
        let pct = |i: usize| {
            field(i)
                .parse::<f64>()
                .map_err(|_| bad(format!("row {}: `{}` is not a number", n + 1, field(i))))
        };
        let file = field(2).to_string();
        let sut = run_dir.join(&file);
        let sha = sha256_hex(&fs::read(&sut).map_err(io_err(&sut))?);
        let outcome = ProgramOutcome {
            file,
            sha256: sha,
            ga_coverage: pct(3)?,
            rnd_coverage: pct(4)?,
        };
        match cells.last_mut() {
            Some((c, l, v)) if (*c, *l) == (criterion, level) => v.push(outcome),
            _ => cells.push((criterion, level, vec![outcome])),
        }
    }
    cells
        .into_iter()
        .map(|(c, l, programs)| Ok(CellResult::new(c, l, plan.target(c, l), programs)?))
        .collect()
}

/// Regenerates tables and figures of a finished run.
pub fn rerender(run_dir: &Path) -> Result<Vec<CellResult>, HarnessError> {
    let cells = load_cells(run_dir)?;
    if cells.is_empty() {
        return Err(HarnessError::Format {
            path: run_dir.join("per_program_raw.csv"),
            message: "no results to report".into(),
        });
    }
    emit_csv(&cells, run_dir)?;
    emit_figures(&cells, run_dir)?;
    Ok(cells)
}

/// Significance annotation used in human-readable output.
pub fn significance_note(cell: &CellResult) -> String {
    format!(
        "actual CL {:.2} {} desired {DESIRED_CL}",
        cell.summary.actual_cl(),
        if cell.summary.significant() {
            ">="
        } else {
            "<"
        }
    )
}
