//! The four pipeline commands behind the `skeletal` binary. Each stage reads
//! and writes files under the output directory, so stages can be rerun
//! independently.
//!
//! Exit codes: 0 success, 1 internal error, 2 input or validation error,
//! 3 missing artifact from an earlier stage.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use skeletal_core::ranking::{build_skeletal, rank, ChiAccumulator};
use skeletal_core::tdbcur::TdbCurOptions;
use skeletal_core::{Error, Mechanism, SourceTag};
use thiserror::Error;

use crate::campaign::{self, delay_error, parallel_map, SigmaSample};
use crate::config::Config;
use crate::mechfile::{parse_mechanism, reaction_equation, same_content, write_mechanism};
use crate::plot::{Chart, Series};
use crate::snapshot::{fmt9, read_sigma_csv, write_sigma_csv, FactorWriter, MatrixWriter};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("missing artifacts: {0}")]
    Missing(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Internal(_) => 1,
            CliError::Input(_) => 2,
            CliError::Missing(_) => 3,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Internal(format!("{}: {e}", path.display()))
}

fn numeric(case: &str) -> impl FnOnce(Error) -> CliError + '_ {
    move |e| match e {
        Error::InvalidArgument(_) | Error::Shape(_) => CliError::Input(format!("case {case}: {e}")),
        _ => CliError::Internal(format!("case {case}: {e}")),
    }
}

/// Flags shared by the commands.
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub mech: Option<PathBuf>,
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub rank: Option<usize>,
    pub jobs: usize,
    pub seedless: bool,
}

pub fn load_mechanism(path: &Path) -> Result<Mechanism, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_mechanism(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

struct Context {
    config: Config,
    config_path: PathBuf,
    mech_path: PathBuf,
    mechanism: Mechanism,
    out: PathBuf,
    rank: usize,
    jobs: usize,
    seedless: bool,
}

impl Context {
    fn load(opts: &Options) -> Result<Context, CliError> {
        let config_path = opts
            .config
            .clone()
            .ok_or_else(|| CliError::Input("--config is required".into()))?;
        let config = Config::load(&config_path).map_err(|e| CliError::Input(e.to_string()))?;
        let mech_path = opts
            .mech
            .clone()
            .or_else(|| config.mechanism.clone())
            .ok_or_else(|| CliError::Input("no mechanism: pass --mech or set `mechanism` in the config".into()))?;
        let out = opts
            .out
            .clone()
            .or_else(|| config.output.clone())
            .ok_or_else(|| CliError::Input("no output directory: pass --out or set `output` in the config".into()))?;
        let mechanism = load_mechanism(&mech_path)?;
        for case in &config.cases {
            case.initial_state(&mechanism)
                .map_err(|e| CliError::Input(format!("case {}: {e}", case.id)))?;
        }
        let rank = opts.rank.unwrap_or(config.rank);
        fs::create_dir_all(&out).map_err(io_err(&out))?;
        Ok(Context {
            config,
            config_path,
            mech_path,
            mechanism,
            out,
            rank,
            jobs: opts.jobs.max(1),
            seedless: opts.seedless,
        })
    }

    fn case_ids(&self) -> impl Iterator<Item = &str> {
        self.config.cases.iter().map(|c| c.id.as_str())
    }

    /// Written before any computed output; records what was read.
    fn manifest(&self, command: &str, extra_inputs: &[PathBuf]) -> Result<(), CliError> {
        let mut inputs = vec![self.config_path.clone(), self.mech_path.clone()];
        inputs.extend_from_slice(extra_inputs);
        write_manifest(&self.out, command, Some(&self.config_path), &self.mech_path, self.rank, self.seedless, &inputs)
    }
}

fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    }))
}

fn toml_string(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

fn write_manifest(
    out: &Path,
    command: &str,
    config: Option<&Path>,
    mechanism: &Path,
    rank: usize,
    seedless: bool,
    inputs: &[PathBuf],
) -> Result<(), CliError> {
    let mut hashes = BTreeMap::new();
    for p in inputs {
        hashes.insert(p.display().to_string(), sha256_file(p)?);
    }
    let mut s = String::new();
    let _ = writeln!(s, "command = {}", toml_string(command));
    if let Some(c) = config {
        let _ = writeln!(s, "config = {}", toml_string(&c.display().to_string()));
    }
    let _ = writeln!(s, "mechanism = {}", toml_string(&mechanism.display().to_string()));
    let _ = writeln!(s, "output = {}", toml_string(&out.display().to_string()));
    let _ = writeln!(s, "rank = {rank}");
    let _ = writeln!(s, "seedless = {seedless}");
    let _ = writeln!(s, "deterministic = true");
    let _ = writeln!(s, "version = {}", toml_string(env!("CARGO_PKG_VERSION")));
    s.push_str("\n[inputs]\n");
    for (p, h) in &hashes {
        let _ = writeln!(s, "{} = {}", toml_string(p), toml_string(h));
    }
    let path = out.join(format!("manifest-{}.toml", command.replace(' ', "-")));
    fs::write(&path, s).map_err(io_err(&path))
}

/// Output directory built under a temporary name and renamed into place on
/// success; dropped unfinished, it is deleted.
struct Staged {
    tmp: PathBuf,
    dest: PathBuf,
    done: bool,
}

impl Staged {
    fn new(dest: PathBuf) -> Result<Staged, CliError> {
        let name = dest.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let tmp = dest.with_file_name(format!(".{name}.partial"));
        if tmp.exists() {
            fs::remove_dir_all(&tmp).map_err(io_err(&tmp))?;
        }
        fs::create_dir_all(&tmp).map_err(io_err(&tmp))?;
        Ok(Staged { tmp, dest, done: false })
    }

    fn path(&self, file: &str) -> PathBuf {
        self.tmp.join(file)
    }

    fn commit(mut self) -> Result<(), CliError> {
        if self.dest.exists() {
            fs::remove_dir_all(&self.dest).map_err(io_err(&self.dest))?;
        }
        fs::rename(&self.tmp, &self.dest).map_err(io_err(&self.dest))?;
        self.done = true;
        Ok(())
    }
}

impl Drop for Staged {
    fn drop(&mut self) {
        if !self.done {
            let _ = fs::remove_dir_all(&self.tmp);
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(io_err(path))
}

fn write_timing(out: &Path, name: &str, rows: &[(String, f64, usize)]) -> Result<(), CliError> {
    let dir = out.join("timing");
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let mut s = String::from("case,wall_seconds,steps\n");
    for (case, wall, steps) in rows {
        let _ = writeln!(s, "{},{wall:.6},{steps}", csv_field(case));
    }
    write_text(&dir.join(format!("{name}.csv")), &s)
}

fn read_timing(out: &Path, name: &str) -> Result<BTreeMap<String, (f64, usize)>, CliError> {
    let path = out.join("timing").join(format!("{name}.csv"));
    let text = fs::read_to_string(&path).map_err(|_| CliError::Missing(path.display().to_string()))?;
    let mut map = BTreeMap::new();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() == 3 {
            if let (Ok(w), Ok(n)) = (f[1].parse(), f[2].parse()) {
                map.insert(f[0].to_string(), (w, n));
            }
        }
    }
    Ok(map)
}

/// `skeletal check`: parse and validate, print counts.
pub fn check(path: &Path) -> Result<String, CliError> {
    let mech = load_mechanism(path)?;
    let forward = mech.reactions().iter().filter(|r| matches!(r.source_tag, SourceTag::Forward(_))).count();
    let irreversible = mech
        .reactions()
        .iter()
        .filter(|r| matches!(r.source_tag, SourceTag::Irreversible(_)))
        .count();
    let mut s = String::new();
    let _ = writeln!(s, "mechanism: {}", path.display());
    let _ = writeln!(s, "elements: {}", mech.elements().len());
    let _ = writeln!(s, "species (n_sp): {}", mech.n_species());
    let _ = writeln!(s, "reactions in file: {} ({forward} reversible, {irreversible} irreversible)", forward + irreversible);
    let _ = writeln!(s, "irreversible reactions (n_rc): {}", mech.n_reactions());
    let _ = writeln!(s, "state size (n_eq): {}", mech.n_eq());
    Ok(s)
}

const SIGMA_KEEP: usize = 10;

fn sens_dir(out: &Path, kind: &str, case: &str) -> PathBuf {
    out.join(format!("sens-{kind}")).join(case)
}

/// `skeletal sens fom`: dense sensitivities, iSVD spectra and matrix dumps.
pub fn sens_fom(opts: &Options) -> Result<String, CliError> {
    let ctx = Context::load(opts)?;
    ctx.manifest("sens fom", &[])?;
    let results = parallel_map(&ctx.config.cases, ctx.jobs, |case| -> Result<(f64, usize), CliError> {
        let traj = campaign::simulate(&ctx.mechanism, case).map_err(numeric(&case.id))?;
        let stage = Staged::new(sens_dir(&ctx.out, "fom", &case.id))?;
        let matrix_every = ctx.config.matrix_every;
        let mut dump = if matrix_every > 0 {
            let p = stage.path("sensitivity.smat");
            Some(MatrixWriter::create(&p, ctx.mechanism.n_eq(), ctx.mechanism.n_reactions()).map_err(io_err(&p))?)
        } else {
            None
        };
        let last = traj.step_count();
        let run = campaign::run_fom(&ctx.mechanism, &traj, ctx.config.save_every, SIGMA_KEEP, |k, t, s| {
            if let Some(w) = dump.as_mut() {
                if k % matrix_every == 0 || k == last {
                    w.write(k, t, s).map_err(|e| Error::InvalidArgument(e.to_string()))?;
                }
            }
            Ok(())
        })
        .map_err(numeric(&case.id))?;
        if let Some(w) = dump {
            w.finish().map_err(io_err(&stage.tmp))?;
        }
        let p = stage.path("sigma.csv");
        write_sigma_csv(&p, SIGMA_KEEP, &run.sigma).map_err(io_err(&p))?;
        stage.commit()?;
        Ok((run.wall.as_secs_f64(), run.steps))
    });
    finish_sens(&ctx, "sens-fom", results)
}

fn finish_sens(ctx: &Context, name: &str, results: Vec<Result<(f64, usize), CliError>>) -> Result<String, CliError> {
    let mut timing = Vec::new();
    let mut report = String::new();
    for (case, r) in ctx.config.cases.iter().zip(results) {
        let (wall, steps) = r?;
        let _ = writeln!(report, "{name} {}: {steps} steps", case.id);
        timing.push((case.id.clone(), wall, steps));
    }
    write_timing(&ctx.out, name, &timing)?;
    Ok(report)
}

fn tdbcur_options(ctx: &Context) -> Result<TdbCurOptions, CliError> {
    let limit = ctx.mechanism.n_eq().min(ctx.mechanism.n_reactions());
    if ctx.rank == 0 || ctx.rank > limit {
        return Err(CliError::Input(format!("rank {} must lie in 1..={limit}", ctx.rank)));
    }
    let mut o = TdbCurOptions::new(ctx.rank);
    o.oversampling = ctx.config.oversampling;
    o.sigma_basis = ctx.config.sigma_basis;
    Ok(o)
}

/// `skeletal sens rom`: low-rank factors, spectra and per-case importance.
pub fn sens_rom(opts: &Options) -> Result<String, CliError> {
    let ctx = Context::load(opts)?;
    let options = tdbcur_options(&ctx)?;
    ctx.manifest("sens rom", &[])?;
    let (n_eq, n_rc) = (ctx.mechanism.n_eq(), ctx.mechanism.n_reactions());
    let results = parallel_map(&ctx.config.cases, ctx.jobs, |case| -> Result<(f64, usize), CliError> {
        let traj = campaign::simulate(&ctx.mechanism, case).map_err(numeric(&case.id))?;
        let stage = Staged::new(sens_dir(&ctx.out, "rom", &case.id))?;
        let fp = stage.path("factors.bin");
        let mut writer = FactorWriter::create(&fp, n_eq, n_rc, ctx.rank).map_err(io_err(&fp))?;
        let run = campaign::run_rom(&ctx.mechanism, &traj, options, ctx.config.save_every, |f| {
            writer.write(f).map_err(|e| Error::InvalidArgument(e.to_string()))
        })
        .map_err(numeric(&case.id))?;
        writer.finish().map_err(io_err(&fp))?;
        let p = stage.path("sigma.csv");
        write_sigma_csv(&p, ctx.rank, &run.sigma).map_err(io_err(&p))?;
        write_chi(&stage.path("chi.csv"), &ctx.mechanism, &run.chi)?;
        let mut d = String::from("step,time,samples_refreshed,closure_rank,closure_condition,reassembly_condition,truncated\n");
        for x in &run.diagnostics {
            let _ = writeln!(
                d,
                "{},{},{},{},{},{},{}",
                x.step,
                fmt9(x.time),
                x.samples_refreshed,
                x.closure_rank,
                fmt9(x.closure_condition),
                fmt9(x.reassembly_condition),
                x.truncated
            );
        }
        write_text(&stage.path("diagnostics.csv"), &d)?;
        stage.commit()?;
        Ok((run.wall.as_secs_f64(), run.steps))
    });
    finish_sens(&ctx, "sens-rom", results)
}

fn write_chi(path: &Path, mech: &Mechanism, chi: &[f64]) -> Result<(), CliError> {
    let mut s = String::from("index,equation,chi\n");
    for (j, c) in chi.iter().enumerate() {
        let _ = writeln!(s, "{j},{},{}", csv_field(&reaction_equation(mech, j)), fmt9(*c));
    }
    write_text(path, &s)
}

fn read_chi(path: &Path, n_rc: usize) -> Result<Vec<f64>, CliError> {
    let text = fs::read_to_string(path).map_err(|_| CliError::Missing(path.display().to_string()))?;
    let bad = || CliError::Input(format!("{}: malformed importance table", path.display()));
    let mut chi = Vec::with_capacity(n_rc);
    for (j, line) in text.lines().skip(1).enumerate() {
        let (idx, rest) = line.split_once(',').ok_or_else(bad)?;
        let value = rest.rsplit(',').next().ok_or_else(bad)?;
        if idx.parse::<usize>().ok() != Some(j) {
            return Err(bad());
        }
        chi.push(value.parse().map_err(|_| bad())?);
    }
    if chi.len() != n_rc {
        return Err(CliError::Input(format!(
            "{}: {} reactions, mechanism has {n_rc}",
            path.display(),
            chi.len()
        )));
    }
    Ok(chi)
}

/// `skeletal sens compare`: σ overlays of the full-order and low-rank runs
/// and their wall-time ratio.
pub fn sens_compare(opts: &Options) -> Result<String, CliError> {
    let ctx = Context::load(opts)?;
    let mut missing = Vec::new();
    let mut inputs = Vec::new();
    for id in ctx.case_ids() {
        for kind in ["fom", "rom"] {
            let p = sens_dir(&ctx.out, kind, id).join("sigma.csv");
            if p.exists() {
                inputs.push(p);
            } else {
                missing.push(format!("{kind}:{id}"));
            }
        }
    }
    if !missing.is_empty() {
        return Err(CliError::Missing(missing.join(", ")));
    }
    let fom_time = read_timing(&ctx.out, "sens-fom")?;
    let rom_time = read_timing(&ctx.out, "sens-rom")?;
    ctx.manifest("sens compare", &inputs)?;
    let stage = Staged::new(ctx.out.join("compare"))?;
    let mut summary = String::from("case,saved_steps,max_rel_sigma_1,max_rel_sigma_2,max_rel_sigma_3\n");
    let mut timing = String::from("case,fom_seconds,rom_seconds,rom_over_fom\n");
    let mut report = String::new();
    for id in ctx.case_ids() {
        let read = |kind: &str| {
            let p = sens_dir(&ctx.out, kind, id).join("sigma.csv");
            read_sigma_csv(&p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
        };
        let fom = read("fom")?;
        let rom = read("rom")?;
        let (table, common) = overlay(&fom, &rom, 3);
        write_text(&stage.path(&format!("sigma-{id}.csv")), &table)?;
        let errs = campaign::sigma_deviation(&fom, &rom, 3);
        let _ = writeln!(summary, "{},{common},{},{},{}", csv_field(id), fmt9(errs[0]), fmt9(errs[1]), fmt9(errs[2]));
        write_text(&stage.path(&format!("sigma-{id}.svg")), &sigma_chart(id, &fom, &rom).render())?;
        let _ = writeln!(
            report,
            "compare {id}: top-3 sigma max relative deviation {}",
            fmt9(errs.iter().copied().fold(0.0, f64::max))
        );
        if let (Some(f), Some(r)) = (fom_time.get(id), rom_time.get(id)) {
            let _ = writeln!(timing, "{},{:.6},{:.6},{:.6}", csv_field(id), f.0, r.0, r.0 / f.0);
            let _ = writeln!(report, "compare {id}: wall time rom/fom {:.3}", r.0 / f.0);
        }
    }
    write_text(&stage.path("summary.csv"), &summary)?;
    stage.commit()?;
    let tdir = ctx.out.join("timing");
    write_text(&tdir.join("compare.csv"), &timing)?;
    Ok(report)
}

/// Rows at steps present in both tracks: `step,time,fom_1..k,rom_1..k`.
fn overlay(fom: &[SigmaSample], rom: &[SigmaSample], k: usize) -> (String, usize) {
    let mut s = String::from("step,time");
    for i in 1..=k {
        let _ = write!(s, ",fom_sigma_{i}");
    }
    for i in 1..=k {
        let _ = write!(s, ",rom_sigma_{i}");
    }
    s.push('\n');
    let by_step: BTreeMap<usize, &Vec<f64>> = rom.iter().map(|(k, _, v)| (*k, v)).collect();
    let mut n = 0;
    for (step, t, a) in fom {
        let Some(b) = by_step.get(step) else { continue };
        n += 1;
        let _ = write!(s, "{step},{}", fmt9(*t));
        for v in [a, *b] {
            for i in 0..k {
                let _ = write!(s, ",{}", v.get(i).map_or_else(|| "0".into(), |&x| fmt9(x)));
            }
        }
        s.push('\n');
    }
    (s, n)
}

fn sigma_chart(id: &str, fom: &[SigmaSample], rom: &[SigmaSample]) -> Chart {
    let mut series = Vec::new();
    for (label, track, dashed) in [("iSVD", fom, false), ("ROM", rom, true)] {
        for i in 0..3 {
            series.push(Series {
                label: format!("{label} sigma_{}", i + 1),
                points: track.iter().filter_map(|(_, t, s)| s.get(i).map(|&v| (*t, v))).collect(),
                dashed,
            });
        }
    }
    Chart {
        title: format!("Singular values, {id}"),
        x_label: "t (s)".into(),
        y_label: "sigma".into(),
        log_y: true,
        series,
    }
}

/// Fuel, oxidizer and configured species, as indices.
fn protected_species(ctx: &Context) -> Result<Vec<usize>, CliError> {
    let mut names: Vec<&str> = ctx.config.protected.iter().map(String::as_str).collect();
    for c in &ctx.config.cases {
        names.extend(c.fuel.keys().map(String::as_str));
        names.extend(c.oxidizer.keys().map(String::as_str));
    }
    let mut idx = Vec::new();
    for n in names {
        let i = ctx
            .mechanism
            .species_index(n)
            .ok_or_else(|| CliError::Input(format!("protected species {n} is not in the mechanism")))?;
        if !idx.contains(&i) {
            idx.push(i);
        }
    }
    idx.sort_unstable();
    Ok(idx)
}

fn model_file(n_keep: usize) -> String {
    format!("skeletal-n{n_keep}.mech")
}

/// `skeletal reduce`: aggregate importance, rank and emit skeletal models.
pub fn reduce(opts: &Options) -> Result<String, CliError> {
    let ctx = Context::load(opts)?;
    let n_rc = ctx.mechanism.n_reactions();
    let n_sp = ctx.mechanism.n_species();
    let chi_paths: Vec<PathBuf> = ctx.case_ids().map(|id| sens_dir(&ctx.out, "rom", id).join("chi.csv")).collect();
    let missing: Vec<&str> = ctx.case_ids().zip(&chi_paths).filter(|(_, p)| !p.exists()).map(|(id, _)| id).collect();
    if !missing.is_empty() {
        return Err(CliError::Missing(format!("low-rank sensitivities for case(s) {}", missing.join(", "))));
    }
    ctx.manifest("reduce", &chi_paths)?;
    let mut acc = ChiAccumulator::new();
    for p in &chi_paths {
        acc.add(&read_chi(p, n_rc)?).map_err(|e| CliError::Input(e.to_string()))?;
    }
    let chi = acc.finish().map_err(|e| CliError::Internal(e.to_string()))?;
    let ranking = rank(&ctx.mechanism, chi).map_err(|e| CliError::Internal(e.to_string()))?;
    let protected = protected_species(&ctx)?;

    let stage = Staged::new(ctx.out.join("reduce"))?;
    write_chi(&stage.path("chi.csv"), &ctx.mechanism, &ranking.chi)?;
    let mut s = String::from("rank,index,equation,chi\n");
    for (pos, &j) in ranking.reaction_order.iter().enumerate() {
        let _ = writeln!(
            s,
            "{},{j},{},{}",
            pos + 1,
            csv_field(&reaction_equation(&ctx.mechanism, j)),
            fmt9(ranking.chi[j])
        );
    }
    write_text(&stage.path("reaction-order.csv"), &s)?;
    let mut s = String::from("rank,index,name\n");
    for (pos, &i) in ranking.species_order.iter().enumerate() {
        let _ = writeln!(s, "{},{i},{}", pos + 1, csv_field(&ctx.mechanism.species()[i].name));
    }
    write_text(&stage.path("species-order.csv"), &s)?;

    let mut sweep: Vec<usize> = ctx.config.n_keep.iter().map(|&n| n.min(n_sp)).collect();
    sweep.push(n_sp);
    sweep.sort_unstable();
    sweep.dedup();
    if let Some(&n) = sweep.first().filter(|&&n| n < protected.len()) {
        return Err(CliError::Input(format!(
            "n-keep {n} is below the {} protected species",
            protected.len()
        )));
    }
    let case_list: Vec<&str> = ctx.case_ids().collect();
    let mut models = String::from("n_keep,species,reactions,file\n");
    let mut report = String::new();
    for n_keep in sweep {
        let model = build_skeletal(&ctx.mechanism, &ranking.species_order, n_keep, &protected)
            .map_err(|e| CliError::Internal(e.to_string()))?;
        let header = format!(
            "Skeletal model with {n_keep} of {n_sp} species and {} of {n_rc} irreversible reactions.\n\
             Source: {}\nRank {}; cases: {}",
            model.mechanism.n_reactions(),
            ctx.mech_path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
            ctx.rank,
            case_list.join(" ")
        );
        let text = write_mechanism(&model.mechanism, &header).map_err(|e| CliError::Internal(e.to_string()))?;
        // every emitted model must read back as the same mechanism
        let again = parse_mechanism(&text).map_err(|e| CliError::Internal(format!("emitted model n{n_keep}: {e}")))?;
        if !same_content(&again, &model.mechanism) {
            return Err(CliError::Internal(format!("emitted model n{n_keep} does not round-trip")));
        }
        let file = model_file(n_keep);
        write_text(&stage.path(&file), &text)?;
        let _ = writeln!(models, "{n_keep},{},{},{file}", model.mechanism.n_species(), model.mechanism.n_reactions());
        let _ = writeln!(
            report,
            "reduce: n_keep {n_keep} -> {} irreversible reactions ({file})",
            model.mechanism.n_reactions()
        );
    }
    write_text(&stage.path("models.csv"), &models)?;
    stage.commit()?;
    Ok(report)
}

struct ModelEntry {
    n_keep: usize,
    name: String,
    mechanism: Mechanism,
}

fn read_models(ctx: &Context) -> Result<(Vec<ModelEntry>, Vec<PathBuf>), CliError> {
    let dir = ctx.out.join("reduce");
    let list = dir.join("models.csv");
    let text = fs::read_to_string(&list).map_err(|_| CliError::Missing(format!("{} (run `skeletal reduce`)", list.display())))?;
    let mut models = Vec::new();
    let mut paths = vec![list.clone()];
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let n_keep = f
            .first()
            .and_then(|v| v.parse().ok())
            .filter(|_| f.len() == 4)
            .ok_or_else(|| CliError::Input(format!("{}: malformed row `{line}`", list.display())))?;
        let path = dir.join(f[3]);
        if !path.exists() {
            return Err(CliError::Missing(path.display().to_string()));
        }
        let mechanism = load_mechanism(&path)?;
        paths.push(path);
        models.push(ModelEntry {
            n_keep,
            name: format!("n{n_keep}"),
            mechanism,
        });
    }
    if models.is_empty() {
        return Err(CliError::Missing(format!("{} lists no models", list.display())));
    }
    Ok((models, paths))
}

/// `skeletal validate`: ignition delays of the detailed and every skeletal
/// model over the case grid.
pub fn validate(opts: &Options) -> Result<String, CliError> {
    let ctx = Context::load(opts)?;
    let (models, paths) = read_models(&ctx)?;
    ctx.manifest("validate", &paths)?;
    let criterion = ctx.config.criterion;
    let cases = &ctx.config.cases;

    // detailed model first (index 0), then the sweep
    let mut all: Vec<(&str, usize, &Mechanism)> = vec![("detailed", ctx.mechanism.n_species(), &ctx.mechanism)];
    all.extend(models.iter().map(|m| (m.name.as_str(), m.n_keep, &m.mechanism)));
    let pairs: Vec<(usize, usize)> = (0..all.len()).flat_map(|m| (0..cases.len()).map(move |c| (m, c))).collect();
    let delays = parallel_map(&pairs, ctx.jobs, |&(m, c)| campaign::model_delay(all[m].2, &cases[c], criterion));
    let tau = |m: usize, c: usize| &delays[m * cases.len() + c];

    let stage = Staged::new(ctx.out.join("validate"))?;
    let mut table = String::from("case,t0,p0,phi,model,n_keep,tau,epsilon,status\n");
    let mut worst = vec![0.0f64; all.len()];
    for (m, (name, n_keep, _)) in all.iter().enumerate() {
        for (c, case) in cases.iter().enumerate() {
            let (t, failure) = tau(m, c);
            let eps = if m == 0 { t.map(|_| 0.0) } else { Some(delay_error(*t, tau(0, c).0)) };
            worst[m] = worst[m].max(eps.unwrap_or(f64::INFINITY));
            let _ = writeln!(
                table,
                "{},{},{},{},{name},{n_keep},{},{},{}",
                csv_field(&case.id),
                fmt9(case.t0),
                fmt9(case.p0),
                fmt9(case.phi),
                t.map_or_else(String::new, fmt9),
                eps.filter(|e| e.is_finite()).map_or_else(String::new, fmt9),
                csv_field(failure.as_deref().unwrap_or("ok"))
            );
        }
    }
    write_text(&stage.path("delays.csv"), &table)?;

    let tol = ctx.config.tolerance;
    let mut summary = String::new();
    let _ = writeln!(summary, "cases: {}", cases.len());
    let _ = writeln!(summary, "tolerance: {}", fmt9(tol));
    let detailed_failed: Vec<&str> = cases
        .iter()
        .enumerate()
        .filter(|(c, _)| tau(0, *c).0.is_none())
        .map(|(_, k)| k.id.as_str())
        .collect();
    if !detailed_failed.is_empty() {
        let _ = writeln!(summary, "detailed model without ignition: {}", detailed_failed.join(" "));
    }
    let mut smallest = None;
    for (m, (name, n_keep, mech)) in all.iter().enumerate().skip(1) {
        let pass = worst[m] < tol;
        if pass && smallest.is_none() {
            smallest = Some(*n_keep);
        }
        let _ = writeln!(
            summary,
            "model {name}: {} species, {} reactions, max epsilon {}, {}",
            mech.n_species(),
            mech.n_reactions(),
            if worst[m].is_finite() { fmt9(worst[m]) } else { "inf".into() },
            if pass { "pass" } else { "fail" }
        );
    }
    match smallest {
        Some(n) => {
            let _ = writeln!(summary, "smallest passing n_keep: {n}");
        }
        None => {
            let _ = writeln!(summary, "smallest passing n_keep: none");
        }
    }
    write_text(&stage.path("summary.txt"), &summary)?;

    let mut series = Vec::new();
    for (m, (name, _, _)) in all.iter().enumerate().skip(1) {
        let mut pts: Vec<(f64, f64)> = cases
            .iter()
            .enumerate()
            .map(|(c, case)| (1000.0 / case.t0, delay_error(tau(m, c).0, tau(0, c).0)))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        series.push(Series {
            label: name.to_string(),
            points: pts,
            dashed: false,
        });
    }
    let chart = Chart {
        title: "Ignition-delay relative error".into(),
        x_label: "1000/T0 (1/K)".into(),
        y_label: "epsilon".into(),
        log_y: true,
        series,
    };
    write_text(&stage.path("epsilon.svg"), &chart.render())?;
    stage.commit()?;
    Ok(summary)
}

/// Print the commented configuration template.
pub fn template() -> &'static str {
    crate::config::TEMPLATE
}

/// Run all stages in order.
pub fn pipeline(opts: &Options) -> Result<String, CliError> {
    let mut s = String::new();
    for stage in [sens_rom, reduce, validate] {
        s.push_str(&stage(opts)?);
    }
    Ok(s)
}
