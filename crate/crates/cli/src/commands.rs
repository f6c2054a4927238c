use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use meshsteg_core::classify::presets::svm_params;
use meshsteg_core::embed::{self, yang, Manifest, ManifestEntry};
use meshsteg_core::eval::corpus::pair_seed;
use meshsteg_core::eval::{pearson_relevance, write_relevance, write_report, SvmSelection};
use meshsteg_core::mesh::write_off;
use meshsteg_core::stats::{read_feature_csv, write_feature_csv};
use meshsteg_core::synth::random_shape;
use meshsteg_core::{
    assemble, calibrated_features, laplacian_smooth, load_mesh, normalize, run_experiment,
    Classifier, ClassifierKind, EmbedParams, ExperimentConfig, FeatureSet, FeatureVector, Label,
    PairedCorpus, Payload, SplitPlan, SvmParams, TrainOptions, Variant,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::args::{
    scenario, Command, EmbedArgs, EvaluateArgs, ExtractArgs, RelevanceArgs, ReplayArgs, ScoreArgs,
    SmoothArgs, SvmArgs, SynthArgs, TrainArgs,
};
use crate::UsageError;

/// Name of the echo written into directory outputs.
pub const ECHO_NAME: &str = "config.toml";

#[derive(Serialize, Deserialize)]
struct Echo {
    meshsteg: String,
    command: Command,
}

pub fn run(command: Command) -> Result<()> {
    let mut command = match command {
        Command::Replay(r) => load_echo(&r)?,
        c => c,
    };
    absolutize(&mut command)?;
    match &command {
        Command::Synth(a) => synth(a, &command),
        Command::Embed(a) => embed_dir(a, &command),
        Command::Smooth(a) => smooth(a, &command),
        Command::Extract(a) => extract(a, &command),
        Command::Train(a) => train(a, &command),
        Command::Score(a) => score(a, &command),
        Command::Evaluate(a) => evaluate(a, &command),
        Command::Relevance(a) => relevance(a, &command),
        Command::Replay(_) => unreachable!("replay resolved above"),
    }
}

fn load_echo(r: &ReplayArgs) -> Result<Command> {
    let text = fs::read_to_string(&r.config)
        .with_context(|| format!("cannot read {}", r.config.display()))?;
    let echo: Echo = toml::from_str(&text)
        .map_err(|e| UsageError(format!("{} is not a config echo: {e}", r.config.display())))?;
    let mut command = echo.command;
    if let Some(out) = &r.out {
        *output_mut(&mut command) = out.clone();
    }
    log::info!("replaying {}", r.config.display());
    Ok(command)
}

fn output_mut(c: &mut Command) -> &mut PathBuf {
    match c {
        Command::Synth(a) => &mut a.out,
        Command::Embed(a) => &mut a.out,
        Command::Smooth(a) => &mut a.out,
        Command::Extract(a) => &mut a.out,
        Command::Train(a) => &mut a.out,
        Command::Score(a) => &mut a.out,
        Command::Evaluate(a) => &mut a.out,
        Command::Relevance(a) => &mut a.out,
        Command::Replay(_) => unreachable!("replay has no output"),
    }
}

/// Makes every path absolute so the echo does not depend on the working directory.
fn absolutize(c: &mut Command) -> Result<()> {
    let mut paths: Vec<&mut PathBuf> = match c {
        Command::Synth(a) => vec![&mut a.out],
        Command::Embed(a) => vec![&mut a.covers, &mut a.out],
        Command::Smooth(a) => vec![&mut a.input, &mut a.out],
        Command::Extract(a) => {
            let mut v = vec![&mut a.manifest, &mut a.out];
            v.extend(a.dump_elements.as_mut());
            v
        }
        Command::Train(a) => vec![&mut a.features, &mut a.out],
        Command::Score(a) => vec![&mut a.model, &mut a.features, &mut a.out],
        Command::Evaluate(a) => vec![&mut a.features, &mut a.out],
        Command::Relevance(a) => vec![&mut a.features, &mut a.out],
        Command::Replay(_) => Vec::new(),
    };
    for p in paths.iter_mut() {
        **p = std::path::absolute(&**p)?;
    }
    Ok(())
}

/// Echo path for a file output: `<file>.config.toml` beside it.
fn file_echo(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".config.toml");
    out.with_file_name(name)
}

fn write_echo(command: &Command, path: &Path) -> Result<()> {
    let echo = Echo {
        meshsteg: env!("CARGO_PKG_VERSION").to_string(),
        command: command.clone(),
    };
    let text = toml::to_string(&echo).context("serialising the config echo")?;
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    log::info!("config echo: {}", path.display());
    Ok(())
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    Ok(())
}

fn synth(a: &SynthArgs, command: &Command) -> Result<()> {
    fs::create_dir_all(&a.out)?;
    let width = a.count.saturating_sub(1).to_string().len().max(3);
    (0..a.count).into_par_iter().try_for_each(|i| {
        let mesh = random_shape(pair_seed(a.seed, i));
        let path = a.out.join(format!("c{i:0width$}.off"));
        log::info!("{}: {} vertices", path.display(), mesh.vertex_count());
        write_off(&mesh, &path).map_err(anyhow::Error::from)
    })?;
    write_echo(command, &a.out.join(ECHO_NAME))
}

/// `.off` and `.obj` files of a directory, sorted by name.
fn mesh_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot list {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "off" | "obj"))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("EmptyCorpus: no .off or .obj meshes in {}", dir.display());
    }
    Ok(files)
}

fn stem(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn embed_dir(a: &EmbedArgs, command: &Command) -> Result<()> {
    let files = mesh_files(&a.covers)?;
    let cover_dir = a.out.join("covers");
    let stego_dir = a.out.join("stegos");
    fs::create_dir_all(&cover_dir)?;
    fs::create_dir_all(&stego_dir)?;
    let base = EmbedParams {
        variant: a.variant,
        bits: 0,
        alpha: a.alpha,
        delta_k: a.delta_k,
        bins: a.bins,
        n_thr: a.n_thr,
        layers: a.layers,
        intervals: a.intervals,
        seed: a.seed,
    };
    base.validate().map_err(|e| UsageError(e.to_string()))?;
    let results: Vec<Result<ManifestEntry, String>> = files
        .par_iter()
        .enumerate()
        .map(|(i, path)| {
            let id = stem(path);
            let run = || -> Result<ManifestEntry> {
                let cover = normalize(&load_mesh(path, None)?)?;
                let bits = a.bits.unwrap_or(match a.variant {
                    Variant::ChoMean => 64,
                    Variant::YangHist => yang::capacity(a.bins),
                    Variant::ChaoLayers => base.capacity(&cover),
                });
                let params = EmbedParams { bits, ..base };
                let payload = Payload::random(bits, pair_seed(a.seed, i));
                let out = embed::embed(&cover, &params, &payload)?;
                let cover_path = cover_dir.join(format!("{id}.off"));
                let stego_path = stego_dir.join(format!("{id}.off"));
                write_off(&cover, &cover_path)?;
                write_off(&out.stego, &stego_path)?;
                log::info!(
                    "{id}: {bits} bits, {} failed, max displacement {:.3e}",
                    out.failed_bits.len(),
                    out.max_displacement
                );
                Ok(ManifestEntry {
                    id: id.clone(),
                    cover: cover_path,
                    stego: stego_path,
                    variant: a.variant,
                    params: params.param_string(),
                    payload_sha256: payload.sha256(),
                    failed_bits: out.failed_bits.len(),
                })
            };
            run().map_err(|e| format!("{id}\t{e:#}"))
        })
        .collect();
    let mut manifest = Manifest::default();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(e) => manifest.entries.push(e),
            Err(msg) => {
                log::warn!("{msg}");
                failures.push(msg);
            }
        }
    }
    if !failures.is_empty() {
        fs::write(
            a.out.join("failures.tsv"),
            format!("# id\terror\n{}\n", failures.join("\n")),
        )?;
    }
    if manifest.is_empty() {
        bail!("no mesh in {} could be embedded", a.covers.display());
    }
    manifest.write(&a.out.join("manifest.tsv"))?;
    log::info!(
        "{} pairs written, {} meshes failed",
        manifest.len(),
        failures.len()
    );
    write_echo(command, &a.out.join(ECHO_NAME))
}

fn smooth(a: &SmoothArgs, command: &Command) -> Result<()> {
    let params = a.smoothing.into();
    if a.input.is_dir() {
        fs::create_dir_all(&a.out)?;
        mesh_files(&a.input)?.par_iter().try_for_each(|p| {
            let out = a.out.join(format!("{}.off", stem(p)));
            write_off(&laplacian_smooth(&load_mesh(p, None)?, &params), &out)?;
            log::info!("{}", out.display());
            Ok::<_, anyhow::Error>(())
        })?;
        write_echo(command, &a.out.join(ECHO_NAME))
    } else {
        ensure_parent(&a.out)?;
        write_off(
            &laplacian_smooth(&load_mesh(&a.input, None)?, &params),
            &a.out,
        )?;
        write_echo(command, &file_echo(&a.out))
    }
}

fn extract(a: &ExtractArgs, command: &Command) -> Result<()> {
    let manifest = Manifest::read(&a.manifest)?;
    if manifest.is_empty() {
        bail!("EmptyCorpus: {} lists no pairs", a.manifest.display());
    }
    if let Some(dir) = &a.dump_elements {
        fs::create_dir_all(dir)?;
    }
    let smoothing = a.smoothing.into();
    let rows: Vec<Result<[FeatureVector; 2], String>> = manifest
        .entries
        .par_iter()
        .enumerate()
        .map(|(row, e)| {
            let run = || -> Result<[FeatureVector; 2]> {
                let cover = load_mesh(&e.cover, None)?;
                let stego = load_mesh(&e.stego, None)?;
                cover
                    .check_same_connectivity(&stego)
                    .context("cover and stego differ in connectivity")?;
                let mut out = Vec::with_capacity(2);
                for (mesh, label, tag) in [
                    (&cover, Label::Cover, "cover"),
                    (&stego, Label::Stego, "stego"),
                ] {
                    let f = calibrated_features(mesh, &smoothing);
                    if let Some(dir) = &a.dump_elements {
                        let file = fs::File::create(dir.join(format!("{}_{tag}.csv", e.id)))?;
                        f.write_element_csv(file)?;
                    }
                    let mut v = assemble(&f, a.set, a.epsilon)?;
                    v.label = Some(label);
                    out.push(v);
                }
                log::info!("{}: extracted", e.id);
                let [c, s]: [FeatureVector; 2] = out.try_into().expect("two rows");
                Ok([c, s])
            };
            run().map_err(|err| format!("row {} ({}): {err:#}", row + 1, e.id))
        })
        .collect();
    let mut vectors = Vec::with_capacity(2 * rows.len());
    let mut errors = Vec::new();
    for r in rows {
        match r {
            Ok(pair) => vectors.extend(pair),
            Err(msg) => errors.push(msg),
        }
    }
    ensure_parent(&a.out)?;
    if !vectors.is_empty() {
        let file = fs::File::create(&a.out)
            .with_context(|| format!("cannot create {}", a.out.display()))?;
        write_feature_csv(file, &vectors)?;
    }
    write_echo(command, &file_echo(&a.out))?;
    if !errors.is_empty() {
        for msg in &errors {
            eprintln!("{msg}");
        }
        bail!(
            "{} of {} manifest rows failed",
            errors.len(),
            manifest.len()
        );
    }
    Ok(())
}

fn read_rows(path: &Path) -> Result<Vec<FeatureVector>> {
    let file = fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let rows = read_feature_csv(file).with_context(|| format!("reading {}", path.display()))?;
    if rows.is_empty() {
        bail!("{} has no feature rows", path.display());
    }
    Ok(rows)
}

fn project_rows(rows: &[FeatureVector], target: FeatureSet) -> Result<Vec<Vec<f64>>> {
    let idx = rows[0].set.projection(target)?;
    Ok(rows
        .iter()
        .map(|r| idx.iter().map(|&i| r.values[i]).collect())
        .collect())
}

fn svm_selection(a: &SvmArgs) -> Result<SvmSelection> {
    Ok(match (a.grid, a.c, a.gamma, &a.preset) {
        (true, ..) => SvmSelection::Grid,
        (_, Some(c), Some(gamma), _) => SvmSelection::Fixed { c, gamma },
        (_, _, _, Some(p)) => SvmSelection::Preset(Some(scenario(p).map_err(UsageError)?)),
        _ => SvmSelection::Preset(None),
    })
}

fn train(a: &TrainArgs, command: &Command) -> Result<()> {
    let rows = read_rows(&a.features)?;
    let set = a.set.unwrap_or(rows[0].set);
    let x = project_rows(&rows, set)?;
    let y = rows
        .iter()
        .enumerate()
        .map(|(i, r)| match r.label {
            Some(l) => Ok(l.is_stego()),
            None => bail!("row {} has no label", i + 1),
        })
        .collect::<Result<Vec<bool>>>()?;
    let svm = match svm_selection(&a.svm)? {
        SvmSelection::Grid => SvmParams::Grid,
        SvmSelection::Fixed { c, gamma } => SvmParams::Fixed { c, gamma },
        SvmSelection::Preset(s) => {
            let (c, gamma) = svm_params(set, s);
            SvmParams::Fixed { c, gamma }
        }
    };
    let opts = TrainOptions {
        kind: a.clf,
        seed: a.seed,
        svm,
    };
    let model = Classifier::train(&x, &y, set, &opts)?;
    ensure_parent(&a.out)?;
    fs::write(&a.out, model.to_text())
        .with_context(|| format!("cannot write {}", a.out.display()))?;
    log::info!("{} {} model: {}", set, a.clf, a.out.display());
    write_echo(command, &file_echo(&a.out))
}

fn score(a: &ScoreArgs, command: &Command) -> Result<()> {
    let text = fs::read_to_string(&a.model)
        .with_context(|| format!("cannot read {}", a.model.display()))?;
    let model = Classifier::from_text(&text)?;
    let rows = read_rows(&a.features)?;
    let x = project_rows(&rows, model.set)?;
    ensure_parent(&a.out)?;
    let mut w = csv::Writer::from_path(&a.out)?;
    w.write_record(["row", "label", "score", "stego"])?;
    for (i, (r, v)) in rows.iter().zip(&x).enumerate() {
        let s = model.score(v)?;
        w.write_record([
            i.to_string(),
            r.label.map_or(String::new(), |l| l.as_digit().to_string()),
            s.to_string(),
            u8::from(s > 0.0).to_string(),
        ])?;
    }
    w.flush()?;
    write_echo(command, &file_echo(&a.out))
}

fn evaluate(a: &EvaluateArgs, command: &Command) -> Result<()> {
    let rows = read_rows(&a.features)?;
    let corpus = PairedCorpus::from_rows(&rows)?;
    let config = ExperimentConfig {
        sets: a.sets.clone(),
        classifiers: a.clf.clone(),
        plan: SplitPlan {
            trials: a.trials,
            train: a.train,
            test: a.test,
            seed: a.seed,
        },
        svm: svm_selection(&a.svm)?,
    };
    log::info!(
        "{} pairs, {} cells x {} trials",
        corpus.len(),
        a.sets.len() * a.clf.len(),
        a.trials
    );
    let report = run_experiment(&corpus, &config)?;
    if a.clf.contains(&ClassifierKind::Svm) {
        for t in report.trials.iter().filter(|t| t.svm.is_some()) {
            let (c, g) = t.svm.expect("filtered");
            log::info!("{} svm trial {}: C={c} gamma={g}", t.set, t.trial);
        }
    }
    for s in &report.summary {
        log::info!(
            "{:>12} {}: median error {:.4}, median AUC {:.4} (std {:.4})",
            s.set.to_string(),
            s.classifier,
            s.median_error,
            s.median_auc,
            s.auc_std
        );
    }
    write_report(&report, &a.out)?;
    write_echo(command, &a.out.join(ECHO_NAME))
}

fn relevance(a: &RelevanceArgs, command: &Command) -> Result<()> {
    let rows = read_rows(&a.features)?;
    let set = a.set.unwrap_or(rows[0].set);
    let x = project_rows(&rows, set)?;
    let y = rows
        .iter()
        .map(|r| r.label.map(Label::is_stego))
        .collect::<Option<Vec<bool>>>()
        .context("every row needs a label")?;
    let r = pearson_relevance(&x, &y, set)?;
    write_relevance(&r, &a.out)?;
    log::info!("category ranking: {:?}", r.ranking());
    write_echo(command, &a.out.join(ECHO_NAME))
}
