use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use tritter_core::discrimination::{EsdSetup, OutcomeCounts, ParityModel};
use tritter_core::keyrate::{
    keyrate_table, rate_per_signal, threshold_table, KeyRateParams, TABLE_HEADER,
};
use tritter_core::optics::{build_dft, decompose_dft, recompose};
use tritter_core::protocols::teleport::sample_branch;
use tritter_core::protocols::{
    mdi_qkd_run, teleport_branches, CorrectionOp, NoiseConfig, QkdRun, TeleportTarget,
};
use tritter_core::rng::trial_rng;
use tritter_core::{DiscriminationOutcome, StateFamilyIndex};

use crate::{
    CliError, Command, DescribeTritterArgs, DiscriminateArgs, Format, KeyrateArgs, KeyrateSub,
    ListStatesArgs, MdiqkdArgs, TeleportArgs,
};

type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn execute(command: &Command, stdout: &mut dyn Write) -> Result<()> {
    match command {
        Command::ListStates(a) => list_states(a, stdout),
        Command::DescribeTritter(a) => describe_tritter(a, stdout),
        Command::Discriminate(a) => discriminate(a, stdout),
        Command::Teleport(a) => teleport(a, stdout),
        Command::Mdiqkd(a) => mdiqkd(a, stdout),
        Command::Keyrate(a) => keyrate(a, stdout),
    }
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(CliError::Config("--trials must be at least 1".into()));
    }
    Ok(())
}

fn check_unit(name: &str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(CliError::Config(format!(
            "--{name} must lie in [0, 1], got {value}"
        )));
    }
    Ok(())
}

/// Writes `bytes` to `path`, or to stdout when no path is given.
fn emit(path: Option<&Path>, stdout: &mut dyn Write, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => {
            let mut f = BufWriter::new(File::create(p)?);
            f.write_all(bytes)?;
            f.flush()?;
        }
        None => stdout.write_all(bytes)?,
    }
    Ok(())
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

fn list_states(a: &ListStatesArgs, stdout: &mut dyn Write) -> Result<()> {
    if let Some(name) = &a.dump_state {
        let state = StateFamilyIndex::parse_with_dim(name, a.d)?.build()?;
        return emit(None, stdout, &json_bytes(&state)?);
    }
    if a.d < 2 {
        return Err(tritter_core::Error::InvalidDimension(a.d).into());
    }
    writeln!(stdout, "name\tterms\tphotons")?;
    for idx in StateFamilyIndex::all_for_dimension(a.d) {
        let s = idx.build()?;
        writeln!(
            stdout,
            "{idx}\t{}\t{}",
            s.len(),
            s.photon_count().unwrap_or(0)
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TritterReport {
    d: usize,
    unitary_re: Vec<Vec<f64>>,
    unitary_im: Vec<Vec<f64>>,
    network: tritter_core::ElementNetwork,
    reflectivities: Vec<f64>,
    recompose_error: f64,
}

fn describe_tritter(a: &DescribeTritterArgs, stdout: &mut dyn Write) -> Result<()> {
    let u = build_dft(a.d)?;
    let network = decompose_dft(a.d)?;
    let rows = |f: fn(&tritter_core::C64) -> f64| -> Vec<Vec<f64>> {
        (0..a.d)
            .map(|r| (0..a.d).map(|c| f(&u.entry(r, c))).collect())
            .collect()
    };
    let report = TritterReport {
        d: a.d,
        unitary_re: rows(|z| z.re),
        unitary_im: rows(|z| z.im),
        reflectivities: network
            .elements()
            .iter()
            .filter_map(|e| e.reflectivity())
            .collect(),
        recompose_error: u.phase_aligned_distance(&recompose(&network)),
        network,
    };
    emit(None, stdout, &json_bytes(&report)?)
}

#[derive(Serialize)]
struct DiscriminateReport {
    d: usize,
    state: String,
    trials: u64,
    eta: f64,
    seed: u64,
    counts: OutcomeCounts,
    analytic_pass_probability: f64,
    analytic_outcomes: BTreeMap<String, f64>,
}

fn discriminate(a: &DiscriminateArgs, stdout: &mut dyn Write) -> Result<()> {
    check_trials(a.trials)?;
    check_unit("eta", a.eta)?;
    let idx = StateFamilyIndex::parse_with_dim(&a.state, a.d)?;
    let state = idx.build()?;
    let model = ParityModel::new(a.eta)?;
    let analysis = EsdSetup::new(a.d)?.analyze(&state)?;
    let counts = analysis.run_trials(model, a.seed, a.trials);
    let report = DiscriminateReport {
        d: a.d,
        state: idx.to_string(),
        trials: a.trials,
        eta: a.eta,
        seed: a.seed,
        counts,
        analytic_pass_probability: analysis.pass_prob,
        analytic_outcomes: analysis
            .outcome_probabilities(model)
            .into_iter()
            .map(|(o, p)| (o.to_string(), p))
            .collect(),
    };
    emit(a.out.as_deref(), stdout, &json_bytes(&report)?)
}

#[derive(Serialize)]
struct TeleportReport {
    trials: u64,
    seed: u64,
    conclusive: u64,
    post_select_fail: u64,
    conclusive_fraction: f64,
    analytic_conclusive_probability: f64,
    mean_conclusive_fidelity: Option<f64>,
    min_conclusive_fidelity: Option<f64>,
    corrections: BTreeMap<String, u64>,
}

fn teleport(a: &TeleportArgs, stdout: &mut dyn Write) -> Result<()> {
    check_trials(a.trials)?;
    let mut conclusive = 0u64;
    let mut failed = 0u64;
    let mut analytic = 0.0;
    let mut fid_sum = 0.0;
    let mut fid_min = f64::INFINITY;
    let mut corrections: BTreeMap<String, u64> = BTreeMap::new();
    for t in 0..a.trials {
        let mut rng = trial_rng(a.seed, t);
        let target = TeleportTarget::haar(&mut rng);
        let (branches, _) = teleport_branches(&target)?;
        analytic += branches
            .iter()
            .filter(|b| b.outcome.is_conclusive())
            .map(|b| b.probability)
            .sum::<f64>();
        let res = sample_branch(&branches, &mut rng);
        match (res.outcome, res.fidelity) {
            (DiscriminationOutcome::Conclusive(i), Some(f)) => {
                conclusive += 1;
                fid_sum += f;
                fid_min = fid_min.min(f);
                let op = CorrectionOp::for_outcome(i)?;
                *corrections
                    .entry(format!("{op:?}").to_lowercase())
                    .or_insert(0) += 1;
            }
            _ => failed += 1,
        }
    }
    let report = TeleportReport {
        trials: a.trials,
        seed: a.seed,
        conclusive,
        post_select_fail: failed,
        conclusive_fraction: conclusive as f64 / a.trials as f64,
        analytic_conclusive_probability: analytic / a.trials as f64,
        mean_conclusive_fidelity: (conclusive > 0).then(|| fid_sum / conclusive as f64),
        min_conclusive_fidelity: (conclusive > 0).then_some(fid_min),
        corrections,
    };
    emit(a.out.as_deref(), stdout, &json_bytes(&report)?)
}

#[derive(Serialize)]
struct CsvRecord {
    trial: u64,
    alice_basis: String,
    alice_value: usize,
    bob_basis: String,
    bob_value: usize,
    outcome: String,
    sifted: bool,
    alice_symbol: Option<usize>,
    bob_symbol: Option<usize>,
}

#[derive(Serialize)]
struct QkdSummary {
    trials: u64,
    eta: f64,
    noise: f64,
    seed: u64,
    sifted: u64,
    errors: u64,
    sift_rate: f64,
    expected_sift_rate: f64,
    qber: f64,
    qber_computational: f64,
    qber_mub: f64,
    rate_per_signal_at_qber: Option<f64>,
}

fn qkd_summary(a: &MdiqkdArgs, run: &QkdRun) -> QkdSummary {
    use tritter_core::Basis;
    QkdSummary {
        trials: a.trials,
        eta: a.eta,
        noise: a.noise,
        seed: a.seed,
        sifted: run.sifted,
        errors: run.errors,
        sift_rate: run.sift_rate,
        expected_sift_rate: a.eta.powi(3) / 6.0,
        qber: run.qber,
        qber_computational: run.qber_in(Basis::Computational),
        qber_mub: run.qber_in(Basis::Mub),
        rate_per_signal_at_qber: rate_per_signal(3, run.qber).ok(),
    }
}

fn mdiqkd(a: &MdiqkdArgs, stdout: &mut dyn Write) -> Result<()> {
    check_trials(a.trials)?;
    check_unit("eta", a.eta)?;
    check_unit("noise", a.noise)?;
    let run = mdi_qkd_run(a.trials, a.eta, NoiseConfig::new(a.noise)?, a.seed)?;
    let bytes = match a.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &run.records {
                w.serialize(CsvRecord {
                    trial: r.trial,
                    alice_basis: r.alice_basis.to_string(),
                    alice_value: r.alice_value,
                    bob_basis: r.bob_basis.to_string(),
                    bob_value: r.bob_value,
                    outcome: r.charlie_outcome.to_string(),
                    sifted: r.sifted,
                    alice_symbol: r.key_pair.map(|k| k.0),
                    bob_symbol: r.key_pair.map(|k| k.1),
                })?;
            }
            w.into_inner().map_err(|e| CliError::Io(e.into_error()))?
        }
        Format::Json => json_bytes(&serde_json::json!({
            "summary": qkd_summary(a, &run),
            "records": run.records,
        }))?,
    };
    emit(a.out.as_deref(), stdout, &bytes)?;
    if a.out.is_some() {
        stdout.write_all(&json_bytes(&qkd_summary(a, &run))?)?;
    }
    Ok(())
}

fn keyrate(a: &KeyrateArgs, stdout: &mut dyn Write) -> Result<()> {
    if let Some(KeyrateSub::Thresholds { d_max, out }) = &a.sub {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in threshold_table(*d_max)? {
            w.serialize(row)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
        return emit(out.as_deref(), stdout, &bytes);
    }
    let t = &a.table;
    let params = KeyRateParams {
        dims: t.d.clone(),
        q_max: t.q_max,
        q_step: t.q_step,
        eta: t.eta,
    };
    let rows = keyrate_table(&params)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TABLE_HEADER)?;
    for r in rows {
        w.write_record([
            r.d.to_string(),
            r.q.to_string(),
            r.r_sifted.to_string(),
            r.r_total.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    emit(t.out.as_deref(), stdout, &bytes)
}
