use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use lie_eqgnn::data::{
    load_jets, split_dataset, synthetic_jets, to_graphs, write_jets, JetEntry, LoadOptions, SplitSpec,
};
use lie_eqgnn::minkowski::sample_lorentz;
use lie_eqgnn::model::{count_parameters, JetGraph, Model, ModelConfig, ParamCount, Variant};
use lie_eqgnn::train::{
    evaluate, load_checkpoint, read_metrics, save_checkpoint, write_metrics, AdamWConfig, LrSchedule, TrainConfig,
    Trainer,
};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{
    EquivarianceArgs, EvalArgs, GradCheckArgs, LoadArgs, ParamCountArgs, PlotArgs, SynthArgs, TrainArgs,
};
use crate::plot::render_svg;
use crate::CliError;

pub const METRICS_FILE: &str = "metrics.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.bin";
pub const CONFIG_FILE: &str = "config.json";

/// Dataset size at which the default split switches to 10000/1250/1250.
const FULL_SPLIT: SplitSpec = SplitSpec { n_train: 10_000, n_val: 1_250, n_test: 1_250, seed: 0 };

fn load_opts(a: &LoadArgs) -> LoadOptions {
    LoadOptions { min_particles: a.min_particles, max_particles: a.max_particles }
}

fn load(path: &Path, a: &LoadArgs) -> Result<Vec<JetEntry>, CliError> {
    let (jets, _) = load_jets(path, &load_opts(a)).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(jets)
}

pub fn synth_data(a: SynthArgs) -> Result<(), CliError> {
    let jets = synthetic_jets(a.n_per_class, a.seed)?;
    write_jets(&a.out, &jets).map_err(|e| CliError::Data(format!("{}: {e}", a.out.display())))?;
    println!("wrote {} jets to {}", jets.len(), a.out.display());
    Ok(())
}

/// Explicit counts win; otherwise the full split when the data allows it, else 80/10/10.
fn resolve_split(a: &TrainArgs, available: usize) -> SplitSpec {
    let seed = a.split_seed.unwrap_or(a.seed);
    let base = if available >= FULL_SPLIT.total() {
        FULL_SPLIT
    } else {
        let n_train = available * 8 / 10;
        let n_val = available / 10;
        SplitSpec { n_train, n_val, n_test: available - n_train - n_val, seed }
    };
    SplitSpec {
        n_train: a.n_train.unwrap_or(base.n_train),
        n_val: a.n_val.unwrap_or(base.n_val),
        n_test: a.n_test.unwrap_or(base.n_test),
        seed,
    }
}

#[derive(Serialize)]
struct RunConfig<'a> {
    data: &'a Path,
    variant: Variant,
    model: &'a ModelConfig,
    train: &'a TrainConfig,
    split: SplitSpec,
    load: LoadOptions,
    init_seed: u64,
    resumed_from: Option<&'a Path>,
    resumed_at_epoch: Option<usize>,
}

pub fn train(a: TrainArgs) -> Result<(), CliError> {
    let jets = load(&a.data, &a.load)?;
    let split = resolve_split(&a, jets.len());
    let parts = split_dataset(&jets, &split)?;
    if parts.train.is_empty() {
        return Err(CliError::Data("training split is empty".into()));
    }

    let (mut trainer, resumed_at) = match &a.resume {
        Some(path) => {
            let t = load_checkpoint(path)?;
            let at = t.epoch;
            (t, Some(at))
        }
        None => {
            let mut model_cfg = ModelConfig::for_variant(a.variant);
            model_cfg.max_particles = a.load.max_particles;
            model_cfg.use_pid_mass = !a.no_mass;
            if let Some(c) = a.c {
                model_cfg.c = c;
            }
            let train_cfg = TrainConfig {
                batch_size: a.batch_size,
                seed: a.seed,
                schedule: LrSchedule {
                    warmup_epochs: a.warmup_epochs,
                    total_epochs: a.epochs,
                    base_lr: a.lr,
                    ..LrSchedule::default()
                },
                adamw: AdamWConfig { weight_decay: a.weight_decay, ..AdamWConfig::default() },
                quantum_grad: a.quantum_grad.into(),
                wall_clock: !a.no_wall_clock,
            };
            let model = Model::new(model_cfg, a.seed)?;
            (Trainer::new(model, train_cfg, a.seed)?, None)
        }
    };
    let use_mass = trainer.model.config().use_pid_mass;
    let train_set: Vec<JetGraph<f64>> = to_graphs(&parts.train, use_mass)?;
    let val_set: Vec<JetGraph<f64>> = to_graphs(&parts.val, use_mass)?;

    std::fs::create_dir_all(&a.out_dir)?;
    let variant = Variant::ALL.into_iter().find(|v| v.slots() == trainer.model.config().variant).unwrap_or(a.variant);
    let run = RunConfig {
        data: &a.data,
        variant,
        model: trainer.model.config(),
        train: &trainer.config,
        split,
        load: load_opts(&a.load),
        init_seed: trainer.init_seed,
        resumed_from: a.resume.as_deref(),
        resumed_at_epoch: resumed_at,
    };
    let config_json = serde_json::to_string_pretty(&run).map_err(std::io::Error::from)?;
    std::fs::write(a.out_dir.join(CONFIG_FILE), config_json + "\n")?;

    let stop = a.stop_after.unwrap_or(usize::MAX);
    let metrics_path = a.out_dir.join(METRICS_FILE);
    let ckpt_path = a.out_dir.join(CHECKPOINT_FILE);
    write_metrics(BufWriter::new(File::create(&metrics_path)?), &trainer.history)?;
    while !trainer.finished() && trainer.epoch < stop {
        let m = trainer.train_epoch(&train_set, &val_set)?;
        write_metrics(BufWriter::new(File::create(&metrics_path)?), &trainer.history)?;
        save_checkpoint(&ckpt_path, &trainer)?;
        if a.verbose {
            println!(
                "epoch {:>3}  lr {:.3e}  train loss {:.4} acc {:.3}  val loss {:.4} acc {:.3}  {:.1}s",
                m.epoch, m.lr, m.train_loss, m.train_acc, m.val_loss, m.val_acc, m.seconds
            );
        }
    }
    save_checkpoint(&ckpt_path, &trainer)?;
    if let Some(last) = trainer.history.last() {
        println!(
            "{} epochs, final val loss {:.4} acc {:.4}; wrote {}",
            trainer.epoch,
            last.val_loss,
            last.val_acc,
            a.out_dir.display()
        );
    }
    if !parts.test.is_empty() && trainer.finished() {
        let test = evaluate(&trainer.model, &to_graphs(&parts.test, use_mass)?)?;
        println!("test loss {:.4} acc {:.4} ({} jets)", test.loss, test.accuracy, parts.test.len());
    }
    Ok(())
}

pub fn eval(a: EvalArgs) -> Result<(), CliError> {
    let trainer = load_checkpoint(&a.checkpoint)?;
    let jets = load(&a.data, &a.load)?;
    let graphs: Vec<JetGraph<f64>> = to_graphs(&jets, trainer.model.config().use_pid_mass)?;
    let e = evaluate(&trainer.model, &graphs)?;
    println!("jets {}\nloss {:.6}\naccuracy {:.6}", graphs.len(), e.loss, e.accuracy);
    Ok(())
}

pub fn equivariance_test(a: EquivarianceArgs) -> Result<(), CliError> {
    if a.trials == 0 {
        return Err(CliError::Usage("--trials must be positive".into()));
    }
    let trainer = load_checkpoint(&a.checkpoint)?;
    let model = &trainer.model;
    let jets = match &a.data {
        Some(p) => load(p, &a.load)?,
        None => synthetic_jets(5, a.seed)?
            .into_iter()
            .map(|mut j| {
                j.truncate(model.config().max_particles);
                j
            })
            .collect(),
    };
    if jets.is_empty() {
        return Err(CliError::Data("no jets to test".into()));
    }
    let graphs: Vec<JetGraph<f64>> = to_graphs(&jets, model.config().use_pid_mass)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let transforms = (0..a.trials).map(|_| sample_lorentz(&mut rng, a.max_rapidity)).collect::<Result<Vec<_>, _>>()?;
    let base = graphs.par_iter().map(|g| model.logits(g)).collect::<Result<Vec<_>, _>>()?;
    let deviations = transforms
        .par_iter()
        .enumerate()
        .map(|(k, l)| {
            let j = k % graphs.len();
            let t = model.logits(&graphs[j].transformed(l))?;
            Ok((0..2).map(|c| (t[c] - base[j][c]).abs()).fold(0.0, f64::max))
        })
        .collect::<Result<Vec<f64>, lie_eqgnn::Error>>()?;
    let max = deviations.iter().copied().fold(0.0, f64::max);
    println!(
        "trials {}  max rapidity {}  max logit deviation {:.3e}  tolerance {:.1e}",
        a.trials, a.max_rapidity, max, a.tolerance
    );
    if max > a.tolerance || !max.is_finite() {
        return Err(CliError::Tolerance(format!("max logit deviation {max:.3e} exceeds {:.1e}", a.tolerance)));
    }
    Ok(())
}

pub fn grad_check(a: GradCheckArgs) -> Result<(), CliError> {
    if a.batch == 0 || a.n_params == 0 || !(a.step > 0.0) {
        return Err(CliError::Usage("--batch, --n-params and --step must be positive".into()));
    }
    let cfg = ModelConfig { max_particles: 10, ..ModelConfig::for_variant(a.variant) };
    let model = Model::<f64>::new(cfg, a.seed)?;
    let jets = synthetic_jets(a.batch.div_ceil(2), a.seed)?;
    let mut batch: Vec<JetGraph<f64>> = Vec::with_capacity(a.batch);
    for mut j in jets.into_iter().take(a.batch) {
        j.truncate(10);
        batch.push(j.to_graph(true)?);
    }
    let n = batch.len() as f64;
    let mut grad = vec![0.0; model.layout().total()];
    for jet in &batch {
        let r = model.loss_and_grad(jet, a.quantum_grad.into())?;
        grad.iter_mut().zip(&r.grad).for_each(|(g, x)| *g += x / n);
    }
    let mean_loss = |m: &Model<f64>| -> Result<f64, lie_eqgnn::Error> {
        Ok(batch.iter().map(|j| m.loss(j)).collect::<Result<Vec<_>, _>>()?.iter().sum::<f64>() / n)
    };

    let total = model.layout().total();
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed ^ 0x9e37_79b9);
    let picks = sample(&mut rng, total, a.n_params.min(total)).into_vec();
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    println!("{:<40} {:>14} {:>14} {:>10}", "parameter", "backward", "finite diff", "|diff|");
    for &i in &picks {
        let mut plus = model.clone();
        plus.params_mut()[i] += a.step;
        let mut minus = model.clone();
        minus.params_mut()[i] -= a.step;
        let fd = (mean_loss(&plus)? - mean_loss(&minus)?) / (2.0 * a.step);
        let diff = (fd - grad[i]).abs();
        let bound = a.abs_tolerance.max(a.tolerance * grad[i].abs());
        let name = model.layout().entries().iter().find(|e| e.range().contains(&i)).map_or("?", |e| e.name.as_str());
        let flag = if diff <= bound { "" } else { "  FAIL" };
        println!("{:<40} {:>14.6e} {:>14.6e} {:>10.2e}{flag}", format!("{name}[{}]", i), grad[i], fd, diff);
        worst = worst.max(diff / bound);
        failures += usize::from(diff > bound);
    }
    println!("checked {} parameters, worst |diff|/bound {:.3}", picks.len(), worst);
    if failures > 0 {
        return Err(CliError::Tolerance(format!("{failures} parameter(s) outside tolerance")));
    }
    Ok(())
}

#[derive(Serialize)]
struct CountRow {
    variant: Variant,
    count: ParamCount,
    reference_total: usize,
}

pub fn param_count(a: ParamCountArgs) -> Result<(), CliError> {
    let variants: Vec<Variant> = a.variant.map_or_else(|| Variant::ALL.to_vec(), |v| vec![v]);
    let rows = variants
        .into_iter()
        .map(|v| {
            Ok(CountRow {
                variant: v,
                count: count_parameters(&ModelConfig::for_variant(v))?,
                reference_total: v.reference_param_total(),
            })
        })
        .collect::<Result<Vec<_>, lie_eqgnn::Error>>()?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&rows).map_err(std::io::Error::from)?);
        return Ok(());
    }
    let mut out = std::io::stdout().lock();
    for r in &rows {
        let c = &r.count;
        writeln!(out, "variant {}", r.variant)?;
        writeln!(out, "  {:<24} {:>6}", "embedding", c.embedding)?;
        for (b, bc) in c.blocks.iter().enumerate() {
            writeln!(out, "  {:<24} {:>6}", format!("block{b}.phi_e"), bc.phi_e)?;
            match bc.phi_x {
                Some(x) => writeln!(out, "  {:<24} {:>6}", format!("block{b}.phi_x"), x)?,
                None => writeln!(out, "  {:<24} {:>6}", format!("block{b}.phi_x"), "-")?,
            }
            writeln!(out, "  {:<24} {:>6}", format!("block{b}.phi_h"), bc.phi_h)?;
            writeln!(out, "  {:<24} {:>6}", format!("block{b}.phi_m"), bc.phi_m)?;
        }
        writeln!(out, "  {:<24} {:>6}", "decoder", c.decoder)?;
        writeln!(out, "  {:<24} {:>6}", "total (this repo)", c.total)?;
        writeln!(out, "  {:<24} {:>6}", "reference total", r.reference_total)?;
        for (name, angles) in &c.circuit_angles {
            writeln!(out, "  quantum MLP {name}: {angles} circuit angles")?;
        }
    }
    writeln!(out, "reference totals come from a configuration whose widths were not published; they are not targets")?;
    Ok(())
}

pub fn plot(a: PlotArgs) -> Result<(), CliError> {
    let file = File::open(&a.metrics).map_err(|e| CliError::Data(format!("{}: {e}", a.metrics.display())))?;
    let rows =
        read_metrics(BufReader::new(file)).map_err(|e| CliError::Data(format!("{}: {e}", a.metrics.display())))?;
    if rows.is_empty() {
        return Err(CliError::Data(format!("{}: no metric rows", a.metrics.display())));
    }
    std::fs::write(&a.out, render_svg(&rows))?;
    println!("wrote {}", a.out.display());
    Ok(())
}
