use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ibmagnet::fixtures::{load_scenario, load_unit};
use ibmagnet::io::{self as fmt_io, read_catalog, read_curve_file, read_samples};
use ibmagnet::magnetic_spring::{COIL_SPRING_REDUCTION_RATIO, RUBBER_SPRING_REDUCTION_RATIO};
use ibmagnet::{
    clamp_report, detach_summary, fit_power_law, optimize_tangent_points, simulate_pull,
    snap_to_catalog, ClampMode, Error, ForceCurve, PullMode, Result, SampledCurve, SpringDesign,
};

use crate::plot::{line_chart, Series};
use crate::{
    BalanceArgs, ClampArgs, ClampModeArg, Cli, Command, FitArgs, ModeArg, PullArgs, SynthArgs,
};

const PLOT_POINTS: usize = 500;

pub fn run(cli: &Cli) -> Result<String> {
    let out = Output::new(&cli.out, cli.plot);
    match &cli.command {
        Command::Fit(a) => fit(&out, a),
        Command::Synth(a) => synth(&out, a, cli.seed),
        Command::Balance(a) => balance(&out, a),
        Command::Pulltest(a) => pulltest(&out, a),
        Command::Clamp(a) => clamp(&out, a),
    }
}

struct Output {
    dir: PathBuf,
    plot: bool,
}

impl Output {
    fn new(dir: &Path, plot: bool) -> Self {
        Self {
            dir: dir.to_path_buf(),
            plot,
        }
    }

    fn write(
        &self,
        name: &str,
        body: impl FnOnce(&mut dyn Write) -> Result<()>,
    ) -> Result<PathBuf> {
        let io_err = |path: &Path, source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        std::fs::create_dir_all(&self.dir).map_err(|e| io_err(&self.dir, e))?;
        let path = self.dir.join(name);
        let mut w = BufWriter::new(File::create(&path).map_err(|e| io_err(&path, e))?);
        body(&mut w)?;
        w.flush().map_err(|e| io_err(&path, e))?;
        Ok(path)
    }

    fn svg(&self, name: &str, svg: impl FnOnce() -> String) -> Result<Option<PathBuf>> {
        if !self.plot {
            return Ok(None);
        }
        let text = svg();
        self.write(name, |w| {
            w.write_all(text.as_bytes()).map_err(|e| Error::Io {
                path: name.into(),
                source: e,
            })
        })
        .map(Some)
    }
}

/// Short human-readable number; files keep full precision.
fn short(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn percent(ratio: f64) -> String {
    format!("{:.1}%", ratio * 100.0)
}

fn wrote(report: &mut String, paths: &[Option<PathBuf>]) {
    for p in paths.iter().flatten() {
        let _ = writeln!(report, "wrote {}", p.display());
    }
}

fn fit(out: &Output, a: &FitArgs) -> Result<String> {
    let samples = read_samples(&a.samples)?;
    let curve = fit_power_law(&samples, a.exponent)?;
    let residuals = curve.residuals(&samples);
    let curve_text = fmt_io::curve_file_string(&ForceCurve::from(curve))?;
    let curve_path = out.write("curve.toml", |w| {
        w.write_all(curve_text.as_bytes()).map_err(|e| Error::Io {
            path: "curve.toml".into(),
            source: e,
        })
    })?;
    let res_path = out.write("fit_residuals.csv", |w| {
        fmt_io::write_fit_residuals(w, &samples, &residuals)
    })?;
    let entries = [
        ("amplitude", curve.amplitude().to_string()),
        ("offset_mm", curve.offset().to_string()),
        ("exponent", curve.exponent().to_string()),
        ("samples", samples.len().to_string()),
    ];
    let sum_path = out.write("fit_summary.csv", |w| fmt_io::write_summary(w, &entries))?;

    let mut r = String::new();
    let _ = writeln!(
        r,
        "fit F(x) = A / (x + c)^p  ({} exponent)",
        if a.exponent.is_some() {
            "fixed"
        } else {
            "fitted"
        }
    );
    let _ = writeln!(r, "  A = {}", curve.amplitude());
    let _ = writeln!(r, "  c = {} mm", curve.offset());
    let _ = writeln!(r, "  p = {}", curve.exponent());
    let _ = writeln!(r, "residuals (model - measured):");
    for ((x, f), e) in samples.iter().zip(&residuals) {
        let _ = writeln!(r, "  x = {x} mm, F = {f} N: {e:e} N");
    }
    wrote(&mut r, &[Some(curve_path), Some(res_path), Some(sum_path)]);
    Ok(r)
}

fn load_curve(path: &Path) -> Result<ForceCurve> {
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
    {
        Ok(SampledCurve::new(&read_samples(path)?)?.into())
    } else {
        read_curve_file(path)
    }
}

fn design_series(design: &SpringDesign, label: &'static str) -> Series<'static> {
    let points = (0..=PLOT_POINTS)
        .map(|i| {
            let x = design.x_max * i as f64 / PLOT_POINTS as f64;
            (x, design.force(x))
        })
        .collect();
    Series { label, points }
}

fn synth(out: &Output, a: &SynthArgs, seed: u64) -> Result<String> {
    let curve = load_curve(&a.curve)?;
    let catalog = a.catalog.as_deref().map(read_catalog).transpose()?;
    let design = optimize_tangent_points(&curve, a.n as usize, a.x_max, seed)?;
    let snapped = catalog
        .as_ref()
        .map(|c| snap_to_catalog(&design, c, &curve))
        .transpose()?;

    let mut paths = vec![Some(
        out.write("design.csv", |w| fmt_io::write_design(w, &design))?,
    )];
    if let Some(s) = &snapped {
        paths.push(Some(
            out.write("design_snapped.csv", |w| fmt_io::write_design(w, s))?,
        ));
    }
    let mut entries = vec![
        ("n", a.n.to_string()),
        ("x_max_mm", a.x_max.to_string()),
        ("seed", seed.to_string()),
        ("delta_e_Nmm", design.delta_e.to_string()),
        ("clamped", design.clamped.to_string()),
        ("residual_step_N", design.residual_step.to_string()),
    ];
    if let Some(s) = &snapped {
        entries.push(("delta_e_snapped_Nmm", s.delta_e.to_string()));
        entries.push(("residual_negative", s.residual_negative.to_string()));
    }
    paths.push(Some(out.write("synth_summary.csv", |w| {
        fmt_io::write_summary(w, &entries)
    })?));
    paths.push(out.svg("synth.svg", || {
        let mut series = vec![
            Series {
                label: "magnet",
                points: (0..=PLOT_POINTS)
                    .map(|i| {
                        let x = a.x_max * i as f64 / PLOT_POINTS as f64;
                        (x, curve.eval_force(x).unwrap_or(f64::NAN))
                    })
                    .collect(),
            },
            design_series(&design, "springs"),
        ];
        if let Some(s) = &snapped {
            series.push(design_series(s, "catalog"));
        }
        line_chart("Spring characteristic", "x [mm]", "force [N]", &series)
    })?);

    let mut r = String::new();
    let _ = writeln!(r, "{} springs over {} mm (seed {seed})", a.n, a.x_max);
    for (i, s) in design.springs.iter().enumerate() {
        let _ = writeln!(
            r,
            "  spring {}: k = {} N/mm, engagement end = {} mm, cam depth = {} mm",
            i + 1,
            short(s.stiffness),
            short(s.engagement_end),
            short(s.cam_depth)
        );
    }
    if design.clamped {
        let _ = writeln!(
            r,
            "  last spring cut off at the stroke end, step {} N",
            short(design.residual_step)
        );
    }
    let _ = writeln!(r, "delta E: {} N·mm", design.delta_e);
    if let Some(s) = &snapped {
        let _ = writeln!(r, "delta E after catalog snap: {} N·mm", s.delta_e);
        if s.residual_negative {
            let _ = writeln!(
                r,
                "  warning: snapped characteristic slightly exceeds the curve"
            );
        }
    }
    wrote(&mut r, &paths);
    Ok(r)
}

fn balance(out: &Output, a: &BalanceArgs) -> Result<String> {
    let unit = load_unit(&a.unit)?;
    let profile = unit.pair().deviation_profile(a.grid)?;
    let control = unit.pair().peak_control_force(0.0);
    let peak = *profile.peak();
    let entries = [
        ("unit", unit.name.clone()),
        ("grid", a.grid.to_string()),
        ("peak_deviation_N", peak.deviation.to_string()),
        ("peak_deviation_position_mm", peak.x.to_string()),
        ("peak_internal_force_N", control.net.to_string()),
        (
            "peak_internal_force_position_mm",
            control.position.to_string(),
        ),
    ];
    let paths = [
        Some(out.write("balance.csv", |w| fmt_io::write_balance(w, &profile))?),
        Some(out.write("balance_summary.csv", |w| {
            fmt_io::write_summary(w, &entries)
        })?),
        out.svg("balance.svg", || {
            let pts = profile
                .samples
                .iter()
                .map(|s| (s.x, s.internal_force))
                .collect();
            line_chart(
                &format!("Internal force, {}", unit.name),
                "x [mm]",
                "internal force [N]",
                &[Series {
                    label: "internal",
                    points: pts,
                }],
            )
        })?,
    ];
    let mut r = String::new();
    let _ = writeln!(
        r,
        "balance of {} over {} mm ({} points)",
        unit.name,
        unit.pair().stroke,
        a.grid
    );
    let _ = writeln!(
        r,
        "  largest deviation: {} N at x = {} mm",
        short(peak.deviation),
        short(peak.x)
    );
    let _ = writeln!(
        r,
        "  largest outward internal force: {} N at x = {} mm",
        short(control.net),
        short(control.position)
    );
    wrote(&mut r, &paths);
    Ok(r)
}

fn pulltest(out: &Output, a: &PullArgs) -> Result<String> {
    let unit = load_unit(&a.unit)?;
    let cfg = &unit.config;
    let sweep_end = a.sweep_end.unwrap_or(2.0 * cfg.stroke + cfg.hook_slack);
    let frame = matches!(a.mode, ModeArg::Frame | ModeArg::Both)
        .then(|| simulate_pull(cfg, PullMode::Frame, sweep_end, a.step))
        .transpose()?;
    let rod = matches!(a.mode, ModeArg::Rod | ModeArg::Both)
        .then(|| simulate_pull(cfg, PullMode::Rod, sweep_end, a.step))
        .transpose()?;
    let frame_sum = frame
        .as_ref()
        .map(|p| detach_summary(p, None))
        .transpose()?;
    let rod_sum = rod
        .as_ref()
        .map(|p| detach_summary(p, frame.as_ref()))
        .transpose()?;

    let mut entries = vec![
        ("unit", unit.name.clone()),
        ("step_mm", a.step.to_string()),
        ("sweep_end_mm", sweep_end.to_string()),
        ("plateau_N", cfg.suspended_weight().to_string()),
    ];
    if let Some(s) = &frame_sum {
        entries.push(("frame_peak_N", s.peak_net.to_string()));
        entries.push(("frame_peak_position_mm", s.peak_position.to_string()));
    }
    if let Some(s) = &rod_sum {
        entries.push(("rod_peak_net_N", s.peak_net.to_string()));
        entries.push(("rod_peak_position_mm", s.peak_position.to_string()));
        if let Some(ratio) = s.ratio_vs {
            entries.push(("reduction_ratio", ratio.to_string()));
        }
    }
    entries.push((
        "coil_spring_reduction_ratio",
        COIL_SPRING_REDUCTION_RATIO.to_string(),
    ));
    entries.push((
        "rubber_spring_reduction_ratio",
        RUBBER_SPRING_REDUCTION_RATIO.to_string(),
    ));

    let mut paths = Vec::new();
    if let Some(p) = &frame {
        paths.push(Some(
            out.write("pull_frame.csv", |w| fmt_io::write_pull_profile(w, p))?,
        ));
    }
    if let Some(p) = &rod {
        paths.push(Some(
            out.write("pull_rod.csv", |w| fmt_io::write_pull_profile(w, p))?,
        ));
    }
    paths.push(Some(out.write("pulltest_summary.csv", |w| {
        fmt_io::write_summary(w, &entries)
    })?));
    paths.push(out.svg("pulltest.svg", || {
        let series: Vec<Series> = [(&frame, "frame pull"), (&rod, "rod pull")]
            .into_iter()
            .filter_map(|(p, label)| {
                p.as_ref().map(|p| Series {
                    label,
                    points: p
                        .samples
                        .iter()
                        .map(|s| (s.displacement, s.force()))
                        .collect(),
                })
            })
            .collect();
        line_chart(
            &format!("Pull test, {}", unit.name),
            "displacement [mm]",
            "control force [N]",
            &series,
        )
    })?);

    let mut r = String::new();
    let _ = writeln!(
        r,
        "pull test of {} (step {} mm, travel {} mm)",
        unit.name, a.step, sweep_end
    );
    if let Some(s) = &frame_sum {
        let _ = writeln!(
            r,
            "  frame pull peak: {} N net at {} mm",
            short(s.peak_net),
            short(s.peak_position)
        );
    }
    if let Some(s) = &rod_sum {
        let _ = writeln!(
            r,
            "  rod pull peak:   {} N net at {} mm",
            short(s.peak_net),
            short(s.peak_position)
        );
        if let Some(ratio) = s.ratio_vs {
            let _ = writeln!(r, "  reduction ratio: {}", percent(ratio));
        }
    }
    let _ = writeln!(
        r,
        "  plateau: {} N (unit and jig weight)",
        short(cfg.suspended_weight())
    );
    let _ = writeln!(
        r,
        "  conventional springs: {} (six coil springs), {} (rubber ring spring)",
        percent(COIL_SPRING_REDUCTION_RATIO),
        percent(RUBBER_SPRING_REDUCTION_RATIO)
    );
    wrote(&mut r, &paths);
    Ok(r)
}

fn clamp(out: &Output, a: &ClampArgs) -> Result<String> {
    let scenario = load_scenario(&a.scenario)?;
    let mode = match a.mode {
        ClampModeArg::Replay => ClampMode::Replay,
        ClampModeArg::Model => ClampMode::Model {
            transmission_efficiency: a.efficiency,
            contact_stiffness: a.contact_stiffness,
        },
    };
    let rep = clamp_report(&scenario, mode)?;
    let mode_name = match a.mode {
        ClampModeArg::Replay => "replay",
        ClampModeArg::Model => "model",
    };
    let mut entries = vec![
        ("mode", mode_name.to_string()),
        ("bias_N", rep.bias.to_string()),
        ("control_force_N", rep.control_force.to_string()),
        ("net_without_N", rep.net_without.to_string()),
        ("net_with_N", rep.net_with.to_string()),
    ];
    if let Some(amp) = rep.amplification {
        entries.push(("amplification", amp.to_string()));
    }
    let path = out.write("clamp_summary.csv", |w| fmt_io::write_summary(w, &entries))?;
    let mut r = String::new();
    let _ = writeln!(r, "clamp scenario {} ({mode_name})", a.scenario);
    let _ = writeln!(
        r,
        "  gravity bias: {} N (reported separately)",
        short(rep.bias)
    );
    let _ = writeln!(r, "  control force: {} N", short(rep.control_force));
    let _ = writeln!(
        r,
        "  net clamping force without reduction: {} N",
        short(rep.net_without)
    );
    let _ = writeln!(
        r,
        "  net clamping force with reduction: {} N",
        short(rep.net_with)
    );
    match rep.amplification {
        Some(amp) => {
            let _ = writeln!(r, "  amplification: {amp:.3}");
        }
        None => {
            let _ = writeln!(
                r,
                "  amplification: undefined (nothing clamped without reduction)"
            );
        }
    }
    wrote(&mut r, &[Some(path)]);
    Ok(r)
}
