//! Renders existing result CSVs; never evaluates anything itself.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::OUT_DIR_ENV;
use crate::error::{CliError, CliResult};
use crate::svg::{Figure, Panel, Series, Style};
use crate::PlotArgs;

struct Csv {
    name: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn read(path: &Path) -> CliResult<Self> {
        let mut r = csv::Reader::from_path(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        let header: Vec<String> = r
            .headers()
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?
            .iter()
            .map(str::to_string)
            .collect();
        if header.iter().all(|h| h.is_empty()) {
            return Err(CliError::config(format!("{} is empty: no header and no data rows", path.display())));
        }
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
            rows.push(rec.iter().map(str::to_string).collect());
        }
        if rows.is_empty() {
            return Err(CliError::config(format!("{} has a header but no data rows", path.display())));
        }
        let name = path.file_stem().map_or("data".into(), |s| s.to_string_lossy().into_owned());
        Ok(Self { name, header, rows })
    }

    fn col(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    fn first_col(&self, names: &[&str]) -> Option<usize> {
        names.iter().find_map(|n| self.col(n))
    }

    fn numbers(&self, idx: usize, rows: &[usize]) -> CliResult<Vec<f64>> {
        rows.iter()
            .map(|&r| {
                let cell = &self.rows[r][idx];
                cell.parse()
                    .map_err(|_| CliError::config(format!("{}: {:?} in column {} is not a number", self.name, cell, self.header[idx])))
            })
            .collect()
    }

    fn is_histogram(&self) -> bool {
        self.col("bin_lo").is_some() && self.col("density").is_some()
    }
}

const X_CANDIDATES: &[&str] = &["kappa_re", "kappa_im", "xi_re", "xi_im"];

/// The source column that varies across the first file's rows.
fn auto_x(csv: &Csv) -> Option<&'static str> {
    let varying = X_CANDIDATES.iter().copied().find(|c| {
        csv.col(c).is_some_and(|i| csv.rows.iter().any(|r| r[i] != csv.rows[0][i]))
    });
    varying.or_else(|| X_CANDIDATES.iter().copied().find(|c| csv.col(c).is_some()))
}

fn value_figure(files: &[Csv], x_name: &str, title: String) -> CliResult<Figure> {
    let mut re_series = Vec::new();
    let mut im_series = Vec::new();
    for csv in files {
        let xi = csv
            .col(x_name)
            .ok_or_else(|| CliError::config(format!("{} has no column {x_name:?}", csv.name)))?;
        let (yr, yi) = match (csv.first_col(&["mean_re", "value_re"]), csv.first_col(&["mean_im", "value_im"])) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(CliError::config(format!("{} has no value columns to plot", csv.name))),
        };
        let err = csv.first_col(&["stderr", "err"]);
        let monte_carlo_file = csv.col("mean_re").is_some();
        // split rows by representation so Monte Carlo and quadrature rows of
        // one file get their own series
        let rep = csv.col("representation");
        let mut groups: Vec<(String, Vec<usize>)> = Vec::new();
        for (r, row) in csv.rows.iter().enumerate() {
            let key = rep.map_or(String::new(), |i| row[i].clone());
            match groups.iter_mut().find(|(k, _)| *k == key) {
                Some((_, v)) => v.push(r),
                None => groups.push((key, vec![r])),
            }
        }
        for (key, rows) in groups {
            let points = monte_carlo_file || key == "ordinary_mc";
            let label = if key.is_empty() { csv.name.clone() } else { format!("{} ({key})", csv.name) };
            let x = csv.numbers(xi, &rows)?;
            let errs = match err {
                Some(e) if points => Some(csv.numbers(e, &rows)?),
                _ => None,
            };
            let style = || if points { Style::Points } else { Style::Line };
            re_series.push(Series { label: label.clone(), style: style(), x: x.clone(), y: csv.numbers(yr, &rows)?, err: errs.clone() });
            im_series.push(Series { label, style: style(), x, y: csv.numbers(yi, &rows)?, err: errs });
        }
    }
    Ok(Figure {
        title,
        x_label: x_name.into(),
        panels: vec![
            Panel { y_label: "Re Z".into(), series: re_series },
            Panel { y_label: "Im Z".into(), series: im_series },
        ],
    })
}

fn histogram_figure(files: &[Csv], title: String) -> CliResult<Figure> {
    let mut series = Vec::new();
    for csv in files {
        let all: Vec<usize> = (0..csv.rows.len()).collect();
        let lo = csv.numbers(csv.col("bin_lo").expect("checked"), &all)?;
        let hi_col = csv.col("bin_hi").ok_or_else(|| CliError::config(format!("{} has no bin_hi column", csv.name)))?;
        let hi = csv.numbers(hi_col, &all)?;
        let mut edges = lo.clone();
        edges.push(*hi.last().expect("non-empty"));
        let density = csv.numbers(csv.col("density").expect("checked"), &all)?;
        series.push(Series { label: format!("{} histogram", csv.name), style: Style::Steps, x: edges, y: density, err: None });
        if let Some(m) = csv.col("micro_density") {
            if csv.rows.iter().all(|r| !r[m].is_empty()) {
                let centers = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
                series.push(Series {
                    label: format!("{} microscopic law", csv.name),
                    style: Style::Line,
                    x: centers,
                    y: csv.numbers(m, &all)?,
                    err: None,
                });
            }
        }
    }
    Ok(Figure { title, x_label: "eigenvalue".into(), panels: vec![Panel { y_label: "density".into(), series }] })
}

#[derive(Serialize)]
struct PlotRecord<'a> {
    method: &'static str,
    inputs: &'a [PathBuf],
    output: &'a Path,
    x: Option<&'a str>,
    title: &'a str,
}

pub fn run(args: &PlotArgs) -> CliResult<()> {
    let files = args.inputs.iter().map(|p| Csv::read(p)).collect::<CliResult<Vec<_>>>()?;
    let histograms = files.iter().filter(|c| c.is_histogram()).count();
    if histograms != 0 && histograms != files.len() {
        return Err(CliError::config("cannot overlay histograms with partition-function tables"));
    }
    let title = args.title.clone().unwrap_or_else(|| files.iter().map(|c| c.name.as_str()).collect::<Vec<_>>().join(" vs "));
    let (fig, x) = if histograms > 0 {
        (histogram_figure(&files, title.clone())?, None)
    } else {
        let x = match &args.x {
            Some(x) => x.clone(),
            None => auto_x(&files[0])
                .ok_or_else(|| CliError::config(format!("{} has no source column; pass --x", files[0].name)))?
                .to_string(),
        };
        (value_figure(&files, &x, title.clone())?, Some(x))
    };
    let output = match &args.output {
        Some(p) => p.clone(),
        None => {
            let dir = args
                .out_dir
                .clone()
                .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("."));
            dir.join("plot.svg")
        }
    };
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.display().to_string(), source })?;
    }
    let write = |path: &Path, text: &str| {
        std::fs::write(path, text).map_err(|source| CliError::Write { path: path.display().to_string(), source })
    };
    write(&output, &fig.render())?;
    let record = PlotRecord { method: "plot", inputs: &args.inputs, output: &output, x: x.as_deref(), title: &title };
    let json = serde_json::to_string_pretty(&record).map_err(|e| CliError::config(e.to_string()))?;
    write(&output.with_extension("config.json"), &json)?;
    eprintln!("wrote {}", output.display());
    Ok(())
}
