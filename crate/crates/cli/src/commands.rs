use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use inertia::analysis::{
    break_table, demean_and_pool, increment_regression_vs_level, increment_regression_vs_time, mean_increment_table,
    Era, IncrementSeries, LevelTiming, Panel,
};
use inertia::data::{write_long_csv, SegmentLabel, YearRange};
use inertia::model::{estimate_a, recover_parameters, simulate_series, UpdateRule};
use inertia::report::{emit_table, render_histogram, render_scatter, Cell, PlotLabels, TableDoc, TableFormat};
use inertia::stats::{histogram, shapiro_francia};
use inertia::{CountryId, Dataset, OlsFit, SegmentSpec};

use crate::config::RunConfig;
use crate::{load_config, output_dir, CliError, CommonArgs, SimulateArgs};

type Result<T> = std::result::Result<T, CliError>;

const FIT_COLUMNS: [&str; 8] = [
    "slope",
    "intercept",
    "slope_se",
    "t_stat",
    "p_value",
    "r_squared",
    "n",
    "degenerate",
];

fn fit_cells(fit: &OlsFit) -> Vec<Cell> {
    vec![
        fit.slope.into(),
        fit.intercept.into(),
        fit.slope_se.into(),
        fit.t_stat.into(),
        fit.p_value.into(),
        fit.r_squared.into(),
        fit.n.into(),
        fit.degenerate.into(),
    ]
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("cannot create output directory {}: {e}", dir.display())))
}

fn emit_both(doc: &TableDoc, dir: &Path, round: Option<usize>) -> Result<()> {
    for format in [TableFormat::Csv, TableFormat::Json] {
        let path = dir.join(format!("{}.{}", doc.name, format.extension()));
        emit_table(doc, format, path, round)?;
    }
    Ok(())
}

fn era(cfg: &RunConfig, label: SegmentLabel) -> Result<Era> {
    let segment = cfg.segment(label)?;
    let data = cfg.load_era(label)?;
    Ok(Era::new(data, segment))
}

/// The eras present in the config, PRE first.
fn configured_eras(cfg: &RunConfig) -> Result<Vec<Era>> {
    let mut eras = Vec::new();
    if cfg.pre.is_some() {
        eras.push(era(cfg, SegmentLabel::Pre)?);
    }
    if cfg.post.is_some() {
        eras.push(era(cfg, SegmentLabel::Post)?);
    }
    if eras.is_empty() {
        return Err(CliError::Config(
            "config has neither a `pre` nor a `post` section".into(),
        ));
    }
    Ok(eras)
}

fn segment_slug(seg: &SegmentSpec) -> String {
    seg.label.to_string().to_lowercase()
}

fn display_name(ds: &Dataset, code: &str) -> String {
    ds.get(code)
        .map(|s| s.country().name.clone())
        .unwrap_or_else(|_| code.to_string())
}

pub fn analyze(args: &CommonArgs) -> Result<String> {
    let cfg = load_config(args)?;
    let out = output_dir(args, &cfg);
    let timing = cfg.level_timing();
    let panel = Panel::new(era(&cfg, SegmentLabel::Pre)?, era(&cfg, SegmentLabel::Post)?);

    // compute everything before writing so a data error leaves no partial tree
    let breaks = break_table(&panel)?;
    let means = mean_increment_table(&panel)?;
    let mut increments: Vec<(&Era, Vec<IncrementSeries>)> = Vec::new();
    for e in [&panel.pre, &panel.post] {
        increments.push((e, e.increments()?));
    }

    let mut t1 = TableDoc::new(
        "table1_breaks",
        &[
            "country",
            "name",
            "pre_slope",
            "pre_slope_se",
            "pre_p_value",
            "pre_r_squared",
            "post_slope",
            "post_slope_se",
            "post_p_value",
            "post_r_squared",
            "ratio",
            "pre_degenerate",
            "post_degenerate",
        ],
    );
    for r in &breaks {
        t1.push_row(vec![
            r.country.code.clone().into(),
            r.country.name.clone().into(),
            r.pre.slope.into(),
            r.pre.slope_se.into(),
            r.pre.p_value.into(),
            r.pre.r_squared.into(),
            r.post.slope.into(),
            r.post.slope_se.into(),
            r.post.p_value.into(),
            r.post.r_squared.into(),
            r.ratio.into(),
            r.pre.degenerate.into(),
            r.post.degenerate.into(),
        ])?;
    }

    let mut t2 = TableDoc::new(
        "table2_means",
        &[
            "country",
            "name",
            "pre_mean",
            "pre_sd",
            "pre_n",
            "post_mean",
            "post_sd",
            "post_n",
            "ratio",
        ],
    );
    for r in &means {
        t2.push_row(vec![
            r.country.code.clone().into(),
            r.country.name.clone().into(),
            r.pre.mean.into(),
            r.pre.std_dev.into(),
            r.pre.n.into(),
            r.post.mean.into(),
            r.post.std_dev.into(),
            r.post.n.into(),
            r.ratio.into(),
        ])?;
    }

    let mut level_cols = vec!["country", "name", "segment", "level_timing"];
    level_cols.extend(FIT_COLUMNS);
    let mut t3 = TableDoc::new("table3_increments_vs_level", &level_cols);
    let mut time_cols = vec!["country", "name", "segment"];
    time_cols.extend(FIT_COLUMNS);
    let mut t4 = TableDoc::new("table4_increments_vs_time", &time_cols);
    let mut figures = Vec::new();
    for (e, incs) in &increments {
        for inc in incs {
            let name = display_name(&e.data, &inc.country.code);
            let seg = inc.segment.label.to_string();
            let vs_level = increment_regression_vs_level(inc, timing)?;
            let vs_time = increment_regression_vs_time(inc)?;
            let mut row: Vec<Cell> = vec![inc.country.code.clone().into(), name.clone().into(), seg.clone().into()];
            let mut row3 = row.clone();
            row3.push(timing.to_string().into());
            row3.extend(fit_cells(&vs_level));
            t3.push_row(row3)?;
            row.extend(fit_cells(&vs_time));
            t4.push_row(row)?;

            let points: Vec<(f64, f64)> = inc.levels(timing).into_iter().zip(inc.values()).collect();
            let labels = PlotLabels::new(
                format!("{name} {seg}: annual increment vs level"),
                level_axis(timing),
                "annual increment, $/y",
            );
            let path = out.join("figures").join(format!(
                "increments_{}_{}.svg",
                inc.country.code,
                segment_slug(&inc.segment)
            ));
            figures.push((points, vs_level, labels, path));
        }
    }

    prepare_out(&out)?;
    for doc in [&t1, &t2, &t3, &t4] {
        emit_both(doc, &out, cfg.round)?;
    }
    for (points, fit, labels, path) in &figures {
        render_scatter(points, Some(fit), labels, path)?;
    }

    let mut summary = String::new();
    let _ = writeln!(summary, "analyzed {} countries", breaks.len());
    let _ = writeln!(
        summary,
        "wrote 4 tables and {} figures to {}",
        figures.len(),
        out.display()
    );
    Ok(summary)
}

fn level_axis(timing: LevelTiming) -> &'static str {
    match timing {
        LevelTiming::Prior => "real GDP per capita in the prior year, $",
        LevelTiming::Current => "real GDP per capita, $",
    }
}

pub fn normality(args: &CommonArgs) -> Result<String> {
    let cfg = load_config(args)?;
    let out = output_dir(args, &cfg);
    let eras = configured_eras(&cfg)?;
    let bin_width = cfg.bin_width();
    let trim = cfg.trim();

    let mut report = TableDoc::new(
        "normality",
        &[
            "segment",
            "n",
            "w_before",
            "p_before",
            "trim",
            "n_trimmed",
            "n_after",
            "w_after",
            "p_after",
            "bin_width",
        ],
    );
    let mut counts = TableDoc::new("normality_counts", &["segment", "country", "n"]);
    let mut figures = Vec::new();
    let mut summary = String::new();
    for e in &eras {
        let seg = e.segment.label.to_string();
        let pooled = demean_and_pool(e, None)?;
        let trimmed = demean_and_pool(e, Some(trim))?;
        let before = shapiro_francia(&pooled.values)?;
        let after = shapiro_francia(&trimmed.values)?;
        report.push_row(vec![
            seg.clone().into(),
            pooled.values.len().into(),
            before.w_stat.into(),
            before.p_value.into(),
            trim.into(),
            trimmed.n_trimmed.into(),
            trimmed.values.len().into(),
            after.w_stat.into(),
            after.p_value.into(),
            bin_width.into(),
        ])?;
        for (code, n) in &pooled.counts {
            counts.push_row(vec![seg.clone().into(), code.clone().into(), (*n).into()])?;
        }
        let original = histogram(&pooled.original, bin_width, 0.0)?;
        let demeaned = histogram(&pooled.values, bin_width, 0.0)?;
        let labels = PlotLabels::new(
            format!("{seg}: annual increments, original and demeaned"),
            "annual increment, $/y",
            "count",
        )
        .with_series(&["original", "demeaned"]);
        let path = out
            .join("figures")
            .join(format!("histogram_{}.svg", segment_slug(&e.segment)));
        figures.push((original, demeaned, labels, path));
        let _ = writeln!(
            summary,
            "{seg}: n = {}, p = {:.3e} before trimming; {} beyond ±{trim} removed, p = {:.3e} after",
            pooled.values.len(),
            before.p_value,
            trimmed.n_trimmed,
            after.p_value
        );
    }

    prepare_out(&out)?;
    emit_both(&report, &out, cfg.round)?;
    emit_both(&counts, &out, cfg.round)?;
    for (original, demeaned, labels, path) in &figures {
        render_histogram(original, Some(demeaned), labels, path)?;
    }
    Ok(summary)
}

pub fn simulate(args: &SimulateArgs) -> Result<String> {
    let cfg = load_config(&args.common)?;
    let out = output_dir(&args.common, &cfg);
    let mut sim = cfg.sim_config()?;
    if args.linearize {
        sim.update = UpdateRule::Linearized;
    }
    if let Some(seed) = args.seed {
        sim.seed = seed;
    }
    let section = cfg.simulate.as_ref().expect("checked by sim_config");
    let country = CountryId::new(&section.country)?;
    let series = simulate_series(&sim, country, "SIM")?;

    let mut ds = Dataset::new("simulated");
    ds.insert(series.clone())?;
    let mut summary = String::new();
    let last = series.observations().last().expect("at least two levels");
    let _ = writeln!(
        summary,
        "simulated {} years; level in {} = {}",
        sim.years, last.year, last.value
    );

    let mut docs = Vec::new();
    if args.recover {
        let seg = SegmentSpec::spanning(SegmentLabel::Custom, YearRange::new(sim.params.t0, sim.last_year())?)?;
        let inc = inertia::analysis::annual_increments(&series, &seg)?;
        let mut est_cols = vec!["true_a", "estimate_a", "sd", "n_increments"];
        est_cols.extend(FIT_COLUMNS.iter().map(|c| match *c {
            "slope" => "level_slope",
            "intercept" => "level_intercept",
            "slope_se" => "level_slope_se",
            "t_stat" => "level_t_stat",
            "p_value" => "level_p_value",
            "r_squared" => "level_r_squared",
            "n" => "level_n",
            _ => "level_degenerate",
        }));
        let mut est = TableDoc::new("estimate", &est_cols);
        let stats = estimate_a(&inc)?;
        let mut row: Vec<Cell> = vec![
            sim.params.a.into(),
            stats.mean.into(),
            stats.std_dev.into(),
            stats.n.into(),
        ];
        if inc.len() >= 3 {
            row.extend(fit_cells(&increment_regression_vs_level(&inc, cfg.level_timing())?));
        } else {
            row.extend(std::iter::repeat_n(Cell::Text(String::new()), FIT_COLUMNS.len()));
        }
        est.push_row(row)?;

        let report = recover_parameters(&sim, section.trials)?;
        let mut rec = TableDoc::new(
            "recovery",
            &[
                "trials",
                "seed",
                "true_a",
                "noise_sigma",
                "years",
                "mean_estimate",
                "sd_of_estimates",
                "bias",
                "bias_bound",
                "within_bound",
                "rejection_rate",
                "alpha",
            ],
        );
        rec.push_row(vec![
            report.trials.into(),
            Cell::Int(sim.seed as i64),
            report.true_a.into(),
            sim.noise_sigma.into(),
            Cell::Int(i64::from(sim.years)),
            report.mean_estimate.into(),
            report.sd_of_estimates.into(),
            report.bias.into(),
            report.bias_bound.into(),
            report.within_bound.into(),
            report.rejection_rate.into(),
            report.alpha.into(),
        ])?;
        let _ = writeln!(
            summary,
            "A estimate {} (true {}); recovery over {} trials: bias {:.3} (bound {:.3}), rejection rate {:.3}",
            stats.mean, sim.params.a, report.trials, report.bias, report.bias_bound, report.rejection_rate
        );
        docs.push(est);
        docs.push(rec);
    }

    prepare_out(&out)?;
    let csv_path: PathBuf = out.join("simulated.csv");
    write_long_csv(&ds, &csv_path)?;
    for doc in &docs {
        emit_both(doc, &out, cfg.round)?;
    }
    let _ = writeln!(summary, "wrote {}", csv_path.display());
    Ok(summary)
}

pub fn validate(args: &CommonArgs) -> Result<String> {
    let cfg = load_config(args)?;
    let mut summary = String::new();
    for e in configured_eras(&cfg)? {
        let incs = e.increments()?;
        let _ = writeln!(
            summary,
            "{}: {} countries cover levels {} and increments {}",
            e.segment.label,
            incs.len(),
            e.segment.level_years,
            e.segment.increment_years
        );
    }
    Ok(summary)
}
