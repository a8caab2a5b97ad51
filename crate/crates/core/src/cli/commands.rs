use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::time::Duration;

use serde::Serialize;

use super::{
    BackendArg, Cli, Command, ConvertArgs, DetectArgs, EvaluateArgs, Failure, FormatArg,
    ProjectArgs, ReportFormat, TriggersCommand, ValidateArgs, EXIT_OK, EXIT_RECORD_ERRORS,
};
use crate::adapters::{
    i2b2_mapping, import_assertion_corpus, import_bronco, import_ex4cds, import_jsonl, Import,
    TabularOptions,
};
use crate::engine::{classify_batch, EngineConfig, Mode};
use crate::eval::{
    compare, load_gold, load_predictions, metrics, score, Comparison, EvalError, EvalReport,
};
use crate::projection::{
    project_corpus, CorruptionConfig, HttpBackend, MtBackend, ProjectionConfig, StubBackend,
};
use crate::triggers::{
    load_trigger_set, policy_for, validate_trigger_set, BundledSet, TriggerMatcher, TriggerSet,
};
use crate::types::CorpusRecord;

type Outcome = Result<i32, Failure>;

pub(super) fn dispatch(
    cli: &Cli,
    pool: &rayon::ThreadPool,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Outcome {
    match &cli.command {
        Command::Detect(a) => detect(a, pool, stdout, stderr),
        Command::Project(a) => project(a, cli.jobs, stdout, stderr),
        Command::Convert(a) => convert(a, stdout, stderr),
        Command::Evaluate(a) => evaluate(a, stdout, stderr),
        Command::Triggers(TriggersCommand::Validate(a)) => validate(a, stdout, stderr),
    }
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::unusable(format!("cannot open {}: {e}", path.display())))
}

fn read_to_string(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::unusable(format!("cannot read {}: {e}", path.display())))
}

fn io_failure(path: Option<&Path>, e: std::io::Error) -> Failure {
    match path {
        Some(p) => Failure::unusable(format!("writing {}: {e}", p.display())),
        None => Failure::unusable(format!("writing output: {e}")),
    }
}

/// Runs `f` against `--out` if given, otherwise stdout.
fn with_output(
    path: Option<&Path>,
    stdout: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<(), Failure> {
    let result = match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| io_failure(Some(p), e))?;
            let mut w = BufWriter::new(file);
            f(&mut w).and_then(|_| w.flush())
        }
        None => f(stdout).and_then(|_| stdout.flush()),
    };
    result.map_err(|e| io_failure(path, e))
}

fn write_jsonl<T: Serialize>(
    w: &mut dyn Write,
    items: impl IntoIterator<Item = T>,
) -> std::io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut *w, &item)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

fn read_corpus(path: &Path, what: &str, stderr: &mut dyn Write) -> Result<Import, Failure> {
    let imp = import_jsonl(open(path)?);
    if !imp.errors.is_empty() {
        for e in &imp.errors {
            let _ = writeln!(stderr, "{}: {e}", path.display());
        }
        return Err(Failure::unusable(format!(
            "{what} {} has {} invalid record(s)",
            path.display(),
            imp.errors.len()
        )));
    }
    Ok(imp)
}

fn load_triggers(
    path: &Path,
    lang: &str,
    mode: Mode,
    stderr: &mut dyn Write,
) -> Result<TriggerSet, Failure> {
    let set = load_trigger_set(open(path)?, lang, policy_for(lang, mode))
        .map_err(|e| Failure::unusable(format!("{}: {e}", path.display())))?;
    for w in set.warnings() {
        let _ = writeln!(
            stderr,
            "{}:{}: warning: {}",
            path.display(),
            w.line,
            w.message
        );
    }
    Ok(set)
}

fn detect(
    a: &DetectArgs,
    pool: &rayon::ThreadPool,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Outcome {
    if a.scope_window == 0 {
        return Err(Failure::unusable("--scope-window must be at least 1"));
    }
    let mode = Mode::from(a.mode);
    let set = match &a.triggers {
        Some(p) => load_triggers(p, &a.lang, mode, stderr)?,
        None => BundledSet::for_language(&a.lang, mode)
            .ok_or_else(|| {
                Failure::unusable(format!(
                    "no bundled trigger set for language {:?}; pass --triggers",
                    a.lang
                ))
            })?
            .load(),
    };
    let matcher = TriggerMatcher::compile(&set);
    let mut config = EngineConfig::for_mode(mode).with_scope_window(a.scope_window);
    config.precedence = a.precedence.into();

    let mut records = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in open(&a.corpus)?.lines().enumerate() {
        let line =
            line.map_err(|e| Failure::unusable(format!("reading {}: {e}", a.corpus.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<CorpusRecord>(&line) {
            Ok(r) => records.push(r),
            Err(e) => errors.push(format!("line {}: {e}", i + 1)),
        }
    }

    let results = pool.install(|| classify_batch(records, &matcher, &config));
    let mut detections = Vec::with_capacity(results.len());
    for (id, r) in results {
        match r {
            Ok(d) => detections.push(d.to_record(&id)),
            Err(e) => errors.push(format!("record {id:?}: {e}")),
        }
    }
    with_output(a.out.as_deref(), stdout, |w| write_jsonl(w, &detections))?;

    if errors.is_empty() {
        return Ok(EXIT_OK);
    }
    for e in &errors {
        let _ = writeln!(stderr, "{}: {e}", a.corpus.display());
    }
    let _ = writeln!(
        stderr,
        "{} detection(s) written, {} record(s) failed",
        detections.len(),
        errors.len()
    );
    Ok(EXIT_RECORD_ERRORS)
}

fn project(
    a: &ProjectArgs,
    jobs: usize,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Outcome {
    let corruption = CorruptionConfig {
        max_length_ratio: a.max_length_ratio,
        repeat_ngram: a.repeat_ngram,
        repeat_count: a.repeat_count,
    };
    corruption.validate().map_err(Failure::unusable)?;
    if a.in_flight == 0 {
        return Err(Failure::unusable("--in-flight must be at least 1"));
    }

    let backend: Box<dyn MtBackend> = match a.backend {
        BackendArg::Stub => {
            let lexicon = match &a.lexicon {
                Some(p) => StubBackend::read_lexicon(open(p)?)
                    .map_err(|e| Failure::unusable(format!("{}: {e}", p.display())))?,
                None => StubBackend::example_lexicon(),
            };
            Box::new(StubBackend::new(lexicon, a.unmapped.into()))
        }
        BackendArg::Http => {
            let endpoint = a.endpoint.as_deref().ok_or_else(|| {
                Failure::unusable("the http backend needs --endpoint or MEDFACT_ENDPOINT")
            })?;
            Box::new(
                HttpBackend::new(endpoint, Duration::from_millis(a.timeout_ms))
                    .map_err(Failure::unusable)?,
            )
        }
    };

    let corpus = read_corpus(&a.corpus, "corpus", stderr)?;
    let in_flight = if jobs > 0 {
        a.in_flight.min(jobs)
    } else {
        a.in_flight
    };
    let config = ProjectionConfig {
        corruption,
        in_flight,
    };
    let projection = project_corpus(corpus.sentences, backend.as_ref(), &a.target_lang, &config);

    with_output(a.out.as_deref(), stdout, |w| {
        write_jsonl(w, projection.retained().map(|s| s.to_record()))
    })?;
    if let Some(p) = &a.report {
        let json = serde_json::to_string(&projection.report).expect("report serializes");
        std::fs::write(p, json + "\n").map_err(|e| io_failure(Some(p), e))?;
    }
    let _ = write!(stderr, "{}", projection.report.summary(&config.corruption));
    Ok(EXIT_OK)
}

fn convert(a: &ConvertArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    let tabular = |defaults: TabularOptions| TabularOptions {
        entity_type: match a.entity_type.as_deref() {
            Some("any") => None,
            Some(t) => Some(t.to_string()),
            None => defaults.entity_type,
        },
        max_gap: a.max_gap,
        ..defaults
    };
    let imp = match a.format {
        FormatArg::I2b2 => {
            let text_path = a
                .text
                .as_deref()
                .ok_or_else(|| Failure::unusable("--format i2b2 needs --text"))?;
            let document = read_to_string(text_path)?;
            let doc_id = a.doc_id.clone().unwrap_or_else(|| {
                text_path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default()
            });
            import_assertion_corpus(&document, &doc_id, open(&a.input)?, &i2b2_mapping())
        }
        FormatArg::Ex4cds => import_ex4cds(open(&a.input)?, &tabular(TabularOptions::ex4cds())),
        FormatArg::Bronco => import_bronco(open(&a.input)?, &tabular(TabularOptions::bronco())),
        FormatArg::Jsonl => import_jsonl(open(&a.input)?),
    };

    if !imp.errors.is_empty() {
        for e in &imp.errors {
            let _ = writeln!(stderr, "{}: {e}", a.input.display());
        }
        let _ = writeln!(stderr, "{}", imp.summary);
        return Err(Failure::unusable(format!(
            "{} record(s) could not be converted",
            imp.errors.len()
        )));
    }
    with_output(a.out.as_deref(), stdout, |w| {
        write_jsonl(w, imp.sentences.iter().map(|s| s.to_record()))
    })?;
    let _ = writeln!(stderr, "{}", imp.summary);
    Ok(EXIT_OK)
}

fn file_stem(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| p.display().to_string())
}

#[derive(Serialize)]
struct EvaluationOutput<'a> {
    reports: &'a [EvalReport],
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison: Option<&'a Comparison>,
}

fn evaluate(a: &EvaluateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    let gold = load_gold(open(&a.gold)?)
        .map_err(|e| Failure::unusable(format!("{}: {e}", a.gold.display())))?;
    if !gold.unlabeled.is_empty() {
        let _ = writeln!(
            stderr,
            "note: {} gold record(s) without a label are not scored",
            gold.unlabeled.len()
        );
    }
    let dataset = a.dataset.clone().unwrap_or_else(|| file_stem(&a.gold));

    let mut reports = Vec::new();
    for spec in &a.pred {
        let (name, path) = match spec.split_once('=') {
            Some((n, p)) if !n.is_empty() => (n.to_string(), Path::new(p).to_path_buf()),
            _ => (file_stem(Path::new(spec)), Path::new(spec).to_path_buf()),
        };
        let preds = load_predictions(open(&path)?)
            .map_err(|e| Failure::unusable(format!("{}: {e}", path.display())))?;
        let scored = score(gold.pairs.iter().cloned(), preds).map_err(|e| match e {
            EvalError::MissingPrediction(ids) => Failure::unusable(format!(
                "{}: no prediction for {} gold id(s): {}",
                path.display(),
                ids.len(),
                ids.join(", ")
            )),
            other => Failure::unusable(format!("{}: {other}", a.gold.display())),
        })?;
        if scored.ignored_predictions > 0 {
            let _ = writeln!(
                stderr,
                "warning: {}: {} prediction(s) ignored (unknown or repeated ids)",
                path.display(),
                scored.ignored_predictions
            );
        }
        reports.push(metrics(&scored.matrix).named(name, dataset.clone()));
    }

    let comparison = if reports.len() > 1 {
        Some(compare(&reports).map_err(|e| Failure::unusable(e.to_string()))?)
    } else {
        None
    };
    with_output(a.out.as_deref(), stdout, |w| match a.format {
        ReportFormat::Json => {
            serde_json::to_writer_pretty(
                &mut *w,
                &EvaluationOutput {
                    reports: &reports,
                    comparison: comparison.as_ref(),
                },
            )?;
            w.write_all(b"\n")
        }
        ReportFormat::Text => match &comparison {
            Some(c) => w.write_all(c.to_text().as_bytes()),
            None => w.write_all(reports[0].to_text().as_bytes()),
        },
    })?;
    Ok(EXIT_OK)
}

fn validate(a: &ValidateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    let set = load_triggers(&a.triggers, &a.lang, a.mode.into(), stderr)?;
    let corpus = match &a.corpus {
        Some(p) => Some(read_corpus(p, "sample corpus", stderr)?.sentences),
        None => None,
    };
    let report = validate_trigger_set(&set, corpus.as_deref());
    with_output(None, stdout, |w| match a.format {
        ReportFormat::Json => {
            serde_json::to_writer(&mut *w, &report)?;
            w.write_all(b"\n")
        }
        ReportFormat::Text => {
            for f in &report.findings {
                writeln!(w, "{f}")?;
            }
            writeln!(
                w,
                "{} trigger(s), {} finding(s)",
                set.len(),
                report.findings.len()
            )
        }
    })?;
    Ok(if report.has_encoding_issues() {
        EXIT_RECORD_ERRORS
    } else {
        EXIT_OK
    })
}
