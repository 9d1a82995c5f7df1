use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use slpa::engine::{self, MIN_STABLE_ITERATIONS};
use slpa::postprocess::{postprocess, Detection};
use slpa::report::{Aggregate, MetricReport, Repetition, RunRecord};
use slpa::{metrics, Cover, EngineConfig, Graph, Mode, Threshold};

use crate::io::{self, Input};
use crate::{CliError, DetectArgs, EvalArgs, Format, GenerateArgs, RunArgs, SweepArgs};

/// Version tag written as the first line of sweep tables.
pub const SWEEP_CSV_VERSION: &str = "# slpa-sweep v1";
pub const SWEEP_COLUMNS: &str = "param,value,r,reps,nmi_mean,nmi_std,f_mean,f_std,qov_mean,qov_std,\
communities_mean,communities_std,on_mean,on_std,om_mean,om_std,labels_per_node,seconds_mean,seconds_std";

fn validate_run(run: &RunArgs) -> Result<(), CliError> {
    if run.reps == 0 {
        return Err(CliError::User("--reps must be at least 1".into()));
    }
    if !run.lpa {
        if run.iterations == 0 {
            return Err(CliError::User("--T must be at least 1".into()));
        }
        if run.iterations < MIN_STABLE_ITERATIONS {
            log::warn!(
                "T={} is below {MIN_STABLE_ITERATIONS}; outputs may not have stabilized",
                run.iterations
            );
        }
    }
    if run.jobs == Some(0) {
        return Err(CliError::User("--jobs must be at least 1".into()));
    }
    Ok(())
}

fn engine_config(run: &RunArgs, index: usize) -> EngineConfig {
    EngineConfig {
        iterations: run.iterations,
        seed: run.seed.wrapping_add(index as u64),
        mode: if run.lpa { Mode::Lpa } else { Mode::Slpa },
    }
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j);
    }
    builder
        .build()
        .map_err(|e| CliError::Internal(format!("thread pool: {e}")))
}

/// Checks the output contract of post-processing.
fn check_cover(graph: &Graph, cover: &Cover) -> Result<(), CliError> {
    if !cover.covers_all_nodes() {
        return Err(CliError::Internal("cover misses some nodes".into()));
    }
    if !cover.is_maximal() {
        return Err(CliError::Internal("cover has nested communities".into()));
    }
    for c in cover.communities() {
        if graph.connected_components(c).len() != 1 {
            return Err(CliError::Internal("community is not connected".into()));
        }
    }
    Ok(())
}

fn score(
    graph: &Graph,
    cover: &Cover,
    truth: Option<&Cover>,
    with_qov: bool,
) -> Result<MetricReport, CliError> {
    let mut report = MetricReport::with_stats(metrics::cover_stats(cover));
    if let Some(truth) = truth {
        let f = metrics::overlap_fscore(cover, truth)?;
        report.precision = Some(f.precision);
        report.recall = Some(f.recall);
        report.f_score = Some(f.f_score);
        report.nmi = Some(metrics::extended_nmi(cover, truth)?);
    }
    if with_qov {
        report.qov = Some(metrics::qov(graph, cover)?);
    }
    Ok(report)
}

fn load_truth(path: Option<&Path>, graph: &Graph) -> Result<Option<Input<Cover>>, CliError> {
    path.map(|p| {
        let raw = io::load_cover(p)?;
        let cover = raw
            .value
            .resolve(graph)
            .map_err(|e| io::universe_error(&p.display().to_string(), e))?;
        Ok(Input {
            value: cover,
            record: raw.record,
        })
    })
    .transpose()
}

pub fn detect(args: &DetectArgs) -> Result<(), CliError> {
    let r = Threshold::new(args.r)?;
    validate_run(&args.run)?;
    let graph_in = io::load_graph(&args.graph)?;
    let graph = &graph_in.value;
    let truth = load_truth(args.truth.as_deref(), graph)?;
    let truth_cover = truth.as_ref().map(|t| &t.value);

    let started = Instant::now();
    let reps = args.run.reps;
    let width = reps.saturating_sub(1).to_string().len().max(3);
    let runs: Vec<Repetition> = pool(args.run.jobs)?.install(|| {
        (0..reps)
            .into_par_iter()
            .map(|i| -> Result<Repetition, CliError> {
                let config = engine_config(&args.run, i);
                let t0 = Instant::now();
                let state = engine::run(graph, &config)?;
                let detection = postprocess(graph, &state, r);
                let seconds = t0.elapsed().as_secs_f64();
                check_cover(graph, &detection.cover)?;

                let cover_path = args.out.join(format!("cover_{i:0width$}.txt"));
                io::write(&cover_path, &detection.cover.to_file_string(graph))?;
                if i == 0 {
                    io::write(
                        &args.out.join("fuzzy.tsv"),
                        &detection.distribution.to_tsv(graph),
                    )?;
                    if args.dump_memory {
                        io::write(&args.out.join("memory.txt"), &state.dump(graph))?;
                    }
                }
                Ok(Repetition {
                    index: i,
                    seed: config.seed,
                    metrics: score(graph, &detection.cover, truth_cover, args.qov)?,
                    seconds,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;

    let mut inputs = vec![graph_in.record.clone()];
    inputs.extend(truth.map(|t| t.record));
    let mut record = RunRecord {
        command: "detect".into(),
        iterations: args.run.iterations,
        threshold: r.value(),
        seed: args.run.seed,
        repetitions: reps,
        inputs,
        runs,
        aggregates: Vec::new(),
        seconds: started.elapsed().as_secs_f64(),
    };
    record.summarize();
    let json = serde_json::to_string_pretty(&record)
        .map_err(|e| CliError::Internal(format!("serializing run record: {e}")))?;
    io::write(&args.out.join("run_record.json"), &(json + "\n"))?;

    match args.format {
        Format::Kv => println!("{}", record.summary_line()),
        Format::Csv => {
            println!("rep,seed,{},seconds", MetricReport::csv_header());
            for run in &record.runs {
                println!(
                    "{},{},{},{:.6}",
                    run.index,
                    run.seed,
                    run.metrics.to_csv_row(),
                    run.seconds
                );
            }
        }
    }
    Ok(())
}

pub fn eval(args: &EvalArgs) -> Result<(), CliError> {
    let raw = io::load_cover(&args.cover)?.value;
    let cover_name = args.cover.display().to_string();

    let report = match &args.graph {
        Some(graph_path) => {
            let graph = io::load_graph(graph_path)?.value;
            let cover = raw
                .resolve(&graph)
                .map_err(|e| io::universe_error(&cover_name, e))?;
            let truth = load_truth(args.truth.as_deref(), &graph)?;
            score(&graph, &cover, truth.as_ref().map(|t| &t.value), true)?
        }
        None => {
            let truth_path = args
                .truth
                .as_ref()
                .expect("clap requires --truth or --graph");
            let truth_raw = io::load_cover(truth_path)?.value;
            let (cover, truth, _) = slpa::cover::resolve_pair(&raw, &truth_raw)
                .map_err(|e| io::universe_error(&cover_name, e))?;
            let mut report = MetricReport::with_stats(metrics::cover_stats(&cover));
            let f = metrics::overlap_fscore(&cover, &truth)?;
            report.precision = Some(f.precision);
            report.recall = Some(f.recall);
            report.f_score = Some(f.f_score);
            report.nmi = Some(metrics::extended_nmi(&cover, &truth)?);
            report
        }
    };
    match args.format {
        Format::Kv => println!("{}", report.to_kv()),
        Format::Csv => {
            println!("{}", MetricReport::csv_header());
            println!("{}", report.to_csv_row());
        }
    }
    Ok(())
}

pub fn generate(args: &GenerateArgs) -> Result<(), CliError> {
    let spec = args.bench.spec(args.seed);
    let bench = slpa::generate(&spec)?;
    bench
        .graph
        .validate()
        .map_err(|e| CliError::Internal(format!("generated graph: {e}")))?;
    io::write(&args.out.join("graph.txt"), &bench.graph_file())?;
    io::write(&args.out.join("truth.txt"), &bench.truth_file())?;
    println!(
        "{} communities={} dropped_stubs={} bridging_edges={} external_fraction={:.4}",
        bench.graph.summary(),
        bench.truth.len(),
        bench.dropped_stubs,
        bench.bridging_edges,
        bench.mean_external_fraction()
    );
    Ok(())
}

/// One post-processed repetition at one threshold.
struct Sample {
    metrics: MetricReport,
    seconds: f64,
    labels_per_node: f64,
}

/// Runs `reps` evolutions and post-processes each at every threshold.
/// Returns samples indexed `[threshold][repetition]`.
fn sample_thresholds(
    graph: &Graph,
    truth: Option<&Cover>,
    thresholds: &[Threshold],
    run: &RunArgs,
) -> Result<Vec<Vec<Sample>>, CliError> {
    let per_rep: Vec<Vec<Sample>> = pool(run.jobs)?.install(|| {
        (0..run.reps)
            .into_par_iter()
            .map(|i| -> Result<Vec<Sample>, CliError> {
                let t0 = Instant::now();
                let state = engine::run(graph, &engine_config(run, i))?;
                let evolve = t0.elapsed().as_secs_f64();
                thresholds
                    .iter()
                    .map(|&r| {
                        let t1 = Instant::now();
                        let Detection { cover, labels, .. } = postprocess(graph, &state, r);
                        let seconds = evolve + t1.elapsed().as_secs_f64();
                        check_cover(graph, &cover)?;
                        Ok(Sample {
                            metrics: score(graph, &cover, truth, true)?,
                            seconds,
                            labels_per_node: labels.mean_kept_before_fallback(),
                        })
                    })
                    .collect()
            })
            .collect::<Result<_, _>>()
    })?;

    let mut by_threshold: Vec<Vec<Sample>> = thresholds.iter().map(|_| Vec::new()).collect();
    for rep in per_rep {
        for (t, sample) in rep.into_iter().enumerate() {
            by_threshold[t].push(sample);
        }
    }
    Ok(by_threshold)
}

fn csv_row(param: &str, value: &str, r: f64, samples: &[Sample]) -> String {
    let agg = |f: &dyn Fn(&Sample) -> Option<f64>| -> Option<Aggregate> {
        let values: Option<Vec<f64>> = samples.iter().map(f).collect();
        values.map(|v| Aggregate::of(&v))
    };
    let pair = |a: Option<Aggregate>| {
        a.map_or_else(
            || ",".to_string(),
            |a| format!("{:.6},{:.6}", a.mean, a.std),
        )
    };
    let om_values: Vec<f64> = samples
        .iter()
        .filter(|s| s.metrics.overlapping_nodes > 0)
        .map(|s| s.metrics.avg_memberships)
        .collect();
    let mut row = format!("{param},{value},{r},{}", samples.len());
    let _ = write!(
        row,
        ",{},{},{},{},{},{},{:.6},{}",
        pair(agg(&|s| s.metrics.nmi)),
        pair(agg(&|s| s.metrics.f_score)),
        pair(agg(&|s| s.metrics.qov)),
        pair(agg(&|s| Some(s.metrics.num_communities as f64))),
        pair(agg(&|s| Some(s.metrics.overlapping_nodes as f64))),
        pair(Some(Aggregate::of(&om_values))),
        samples.iter().map(|s| s.labels_per_node).sum::<f64>() / samples.len() as f64,
        pair(agg(&|s| Some(s.seconds))),
    );
    row
}

pub fn sweep(args: &SweepArgs) -> Result<(), CliError> {
    validate_run(&args.run)?;
    if args.r.is_empty() {
        return Err(CliError::User("--r needs at least one threshold".into()));
    }
    let thresholds = args
        .r
        .iter()
        .map(|&r| Threshold::new(r))
        .collect::<Result<Vec<_>, _>>()?;

    let mut table = format!("{SWEEP_CSV_VERSION}\n{SWEEP_COLUMNS}\n");
    let mut emit = |param: &str, value: &str, rows: Vec<Vec<Sample>>| {
        for (t, samples) in rows.iter().enumerate() {
            table.push_str(&csv_row(param, value, thresholds[t].value(), samples));
            table.push('\n');
        }
    };

    if let Some(graph_path) = &args.graph {
        let graph = io::load_graph(graph_path)?.value;
        let truth = load_truth(args.truth.as_deref(), &graph)?;
        let rows = sample_thresholds(
            &graph,
            truth.as_ref().map(|t| &t.value),
            &thresholds,
            &args.run,
        )?;
        emit("graph", &graph_path.display().to_string(), rows);
    } else {
        let points: Vec<(&str, usize, crate::BenchArgs)> = if let Some(oms) = &args.om_list {
            oms.iter()
                .map(|&om| {
                    (
                        "om",
                        om,
                        crate::BenchArgs {
                            om,
                            ..args.bench.clone()
                        },
                    )
                })
                .collect()
        } else if let Some(ns) = &args.n_list {
            ns.iter()
                .map(|&n| {
                    (
                        "n",
                        n,
                        crate::BenchArgs {
                            n,
                            ..args.bench.clone()
                        },
                    )
                })
                .collect()
        } else {
            vec![("n", args.bench.n, args.bench.clone())]
        };
        for (param, value, bench_args) in points {
            let bench = slpa::generate(&bench_args.spec(args.run.seed))?;
            let rows = sample_thresholds(&bench.graph, Some(&bench.truth), &thresholds, &args.run)?;
            emit(param, &value.to_string(), rows);
        }
    }

    match &args.out {
        Some(path) => io::write(path, &table),
        None => {
            print!("{table}");
            Ok(())
        }
    }
}
