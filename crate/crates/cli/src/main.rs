use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use boxdim::construct::{
    apex_add, clique_sum, cocktail_party, ktree_cs_rep, pipeline_clique_sums, pipeline_minor,
    strong_product, subgraph_extend, treewidth_rep, unit_rep_clique, unit_rep_path, CliqueSumTree,
    PipelineOutput, ProductPlan,
};
use boxdim::fragility::{balanced_separator, fragility_experiment, fragility_sample};
use boxdim::graph::{
    clique_cap, greedy_star_coloring, max_clique_size, Clique, Graph, KTreeBuildPlan, StarRule,
    TreeDecomp,
};
use boxdim::representation::{
    envelope_from_boxes, from_json_str, read_certificate, verify_cs_rep, verify_envelope_rep,
    verify_touching_rep, Certificate, CsRep, EnvelopeRep, ParseMode, TouchingRep,
};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

mod plot;

/// Exact touching box representations, their builders and the grid
/// fragility experiments.
#[derive(Parser)]
#[command(name = "boxdim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a certificate, verify it and write it.
    Build {
        #[command(subcommand)]
        recipe: Recipe,
    },
    /// Verify a certificate of any kind; exits 1 on any violation.
    Verify {
        input: PathBuf,
        /// Accept unknown fields, reporting them as warnings.
        #[arg(long)]
        lax: bool,
    },
    /// Draw one deletion set and the decomposition of what survives.
    Sample {
        input: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run many draws and write the fragility report.
    Experiment {
        input: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        /// Record wall-clock time in the report (makes it non-reproducible).
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find a balanced separator from the cell-tree decomposition.
    Separate {
        input: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write an SVG drawing of a certificate of dimension at most 3.
    Plot {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Two coordinate axes to project on, e.g. `0,2`.
        #[arg(long, value_delimiter = ',', num_args = 2)]
        axes: Option<Vec<usize>>,
    },
    /// Summarize a certificate.
    Info { input: PathBuf },
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    k: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Recipe {
    /// `K_m` as `m` corner boxes of a cube (`m` at most `2^d`).
    Clique {
        #[arg(long)]
        size: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Path on `n` vertices as unit intervals.
    Path {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Add one vertex adjacent to the listed vertices.
    Apex {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',')]
        neighbors: Vec<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Strong product of two unit-hypercube representations.
    Product {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Restrict to a spanning subgraph given as a graph file.
    Subgraph {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Clique-sum extendable certificate of a k-tree, from a plan file or a
    /// random plan on `--random` vertices.
    Ktree {
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, conflicts_with = "random")]
        plan: Option<PathBuf>,
        #[arg(long, requires = "k")]
        random: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Representation of a graph from one of its tree decompositions.
    Treewidth {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        decomposition: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Full clique-sum of two clique-sum certificates.
    Cliquesum {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        /// Clique of the left graph to glue on.
        #[arg(long, value_delimiter = ',')]
        glue: Vec<usize>,
        /// Pairs `left=right` matching glue vertices to root vertices of the
        /// right certificate; default pairs both in increasing order.
        #[arg(long = "match", value_delimiter = ',')]
        matching: Vec<String>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// `K_{2n}` minus a perfect matching.
    Cocktail {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Fold a clique-sum tree, then optionally restrict to a spanning
    /// subgraph of the result.
    MinorPipeline {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        target: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args)]
struct OutArgs {
    /// Certificate output path.
    #[arg(long)]
    out: PathBuf,
    /// Also write the verification report here.
    #[arg(long)]
    report: Option<PathBuf>,
}

/// Exit code 2 for unusable input, 1 for failed verification or builds.
enum Failure {
    Input(String),
    Check(String),
}

type Outcome = Result<(), Failure>;

fn input_err(e: impl std::fmt::Display) -> Failure {
    Failure::Input(e.to_string())
}

fn check_err(e: impl std::fmt::Display) -> Failure {
    Failure::Check(e.to_string())
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = read_text(path)?;
    from_json_str(&text, ParseMode::Strict)
        .map(|(v, _)| v)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_cert(path: &Path, mode: ParseMode) -> Result<(Certificate, Vec<String>), Failure> {
    let text = read_text(path)?;
    read_certificate(&text, mode).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Outcome {
    std::fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, value: &Value) -> Outcome {
    let text = serde_json::to_string_pretty(value).expect("json values serialize");
    match out {
        Some(p) => write_text(p, &text),
        None => {
            // A closed pipe (as with `| head`) is not an error.
            let _ = writeln!(std::io::stdout(), "{text}");
            Ok(())
        }
    }
}

fn touching_of(c: Certificate) -> TouchingRep {
    match c {
        Certificate::Touching(r) => r,
        Certificate::CliqueSum(c) => c.base,
        Certificate::Envelope(e) => TouchingRep {
            graph: e.graph,
            dim: e.dim,
            boxes: e.outer,
        },
    }
}

fn read_touching(path: &Path) -> Result<TouchingRep, Failure> {
    read_cert(path, ParseMode::Strict).map(|(c, _)| touching_of(c))
}

fn read_cs(path: &Path) -> Result<CsRep, Failure> {
    match read_cert(path, ParseMode::Strict)?.0 {
        Certificate::CliqueSum(c) => Ok(c),
        _ => Err(Failure::Input(format!(
            "{}: not a clique-sum certificate",
            path.display()
        ))),
    }
}

/// Envelope for the fragility commands; box certificates use their boxes
/// as both inner and outer sets.
fn read_envelope(path: &Path) -> Result<EnvelopeRep, Failure> {
    match read_cert(path, ParseMode::Strict)?.0 {
        Certificate::Envelope(e) => Ok(e),
        other => envelope_from_boxes(&touching_of(other)).map_err(input_err),
    }
}

/// Verification report and validity of a certificate in strict mode.
fn verify(c: &Certificate) -> (Value, bool) {
    match c {
        Certificate::Touching(r) => {
            let rep = verify_touching_rep(r, true);
            (json!(rep), rep.is_valid())
        }
        Certificate::CliqueSum(cs) => {
            let rep = verify_cs_rep(cs);
            (json!(rep), rep.is_valid())
        }
        Certificate::Envelope(e) => {
            let rep = verify_envelope_rep(e);
            (json!(rep), rep.is_valid())
        }
    }
}

fn finish_build(cert: Certificate, out: &OutArgs, extra: Value) -> Outcome {
    let (report, valid) = verify(&cert);
    if !valid {
        return Err(Failure::Check(format!(
            "built certificate does not verify: {report}"
        )));
    }
    let summary = json!({
        "kind": cert.kind(),
        "n": touching_of(cert.clone()).n(),
        "dim": touching_of(cert.clone()).dim,
        "valid": true,
        "details": extra,
        "report": report,
    });
    write_text(&out.out, &cert.to_json())?;
    if let Some(p) = &out.report {
        emit(Some(p), &summary)?;
    }
    emit(None, &summary)
}

fn parse_matching(pairs: &[String]) -> Result<BTreeMap<usize, usize>, Failure> {
    pairs
        .iter()
        .map(|p| {
            let (a, b) = p
                .split_once('=')
                .ok_or_else(|| Failure::Input(format!("bad pair `{p}`, want a=b")))?;
            Ok((
                a.trim().parse().map_err(input_err)?,
                b.trim().parse().map_err(input_err)?,
            ))
        })
        .collect()
}

fn pipeline_summary(o: &PipelineOutput) -> Value {
    json!({
        "leaf_dim": o.leaf_dim,
        "colors": o.colors,
        "clique_sum_dim": o.clique_sum_dim,
        "dim_bound": o.dim_bound,
        "star_colors": o.star_colors,
        "labels": o.labels,
    })
}

fn build(recipe: Recipe) -> Outcome {
    match recipe {
        Recipe::Clique { size, out } => finish_build(
            Certificate::Touching(unit_rep_clique(size)),
            &out,
            json!({}),
        ),
        Recipe::Path { n, out } => {
            if n == 0 {
                return Err(Failure::Input("a path needs at least one vertex".into()));
            }
            finish_build(Certificate::Touching(unit_rep_path(n)), &out, json!({}))
        }
        Recipe::Cocktail { n, out } => {
            finish_build(Certificate::Touching(cocktail_party(n)), &out, json!({}))
        }
        Recipe::Apex {
            input,
            neighbors,
            out,
        } => {
            let r = read_touching(&input)?;
            let nb: BTreeSet<usize> = neighbors.into_iter().collect();
            let built = apex_add(&r, &nb).map_err(check_err)?;
            finish_build(Certificate::Touching(built), &out, json!({ "apex": r.n() }))
        }
        Recipe::Product { left, right, out } => {
            let plan = ProductPlan::new(read_touching(&left)?, read_touching(&right)?)
                .map_err(check_err)?;
            let built = strong_product(&plan).map_err(check_err)?;
            finish_build(Certificate::Touching(built), &out, json!({}))
        }
        Recipe::Subgraph { input, target, out } => {
            let r = read_touching(&input)?;
            let g: Graph = read_json(&target)?;
            let star = greedy_star_coloring(&r.graph, &r.volume_order(), StarRule::default())
                .map_err(check_err)?;
            let built = subgraph_extend(&r, &g, &star).map_err(check_err)?;
            finish_build(
                Certificate::Touching(built),
                &out,
                json!({ "star_colors": star.color_count() }),
            )
        }
        Recipe::Ktree {
            k,
            plan,
            random,
            seed,
            out,
        } => {
            let plan: KTreeBuildPlan = match (plan, random) {
                (Some(p), _) => read_json(&p)?,
                (None, Some(n)) => {
                    let k = k.expect("clap requires k");
                    if n <= k {
                        return Err(Failure::Input(format!(
                            "a {k}-tree needs more than {k} vertices"
                        )));
                    }
                    KTreeBuildPlan::random(k, n, &mut ChaCha8Rng::seed_from_u64(seed))
                }
                (None, None) => return Err(Failure::Input("give --plan or --random".into())),
            };
            if let Some(k) = k {
                if k != plan.k {
                    return Err(Failure::Input(format!(
                        "--k {k} but the plan has k = {}",
                        plan.k
                    )));
                }
            }
            let built = ktree_cs_rep(&plan).map_err(check_err)?;
            finish_build(Certificate::CliqueSum(built), &out, json!({ "k": plan.k }))
        }
        Recipe::Treewidth {
            graph,
            decomposition,
            out,
        } => {
            let g: Graph = read_json(&graph)?;
            let td: TreeDecomp = read_json(&decomposition)?;
            let built = treewidth_rep(&g, &td).map_err(check_err)?;
            finish_build(
                Certificate::Touching(built),
                &out,
                json!({ "width": td.width() }),
            )
        }
        Recipe::Cliquesum {
            left,
            right,
            glue,
            matching,
            out,
        } => {
            let (c1, c2) = (read_cs(&left)?, read_cs(&right)?);
            let glue = Clique::new(glue);
            let matching = if matching.is_empty() {
                glue.vertices()
                    .iter()
                    .copied()
                    .zip(c2.root.vertices().iter().copied())
                    .collect()
            } else {
                parse_matching(&matching)?
            };
            let built = clique_sum(&c1, &glue, &c2, &matching).map_err(check_err)?;
            finish_build(
                Certificate::CliqueSum(built.rep),
                &out,
                json!({ "vertex_map": built.vertex_map }),
            )
        }
        Recipe::MinorPipeline { tree, target, out } => {
            let t: CliqueSumTree = read_json(&tree)?;
            let o = match target {
                Some(p) => pipeline_minor(&t, &read_json(&p)?),
                None => pipeline_clique_sums(&t),
            }
            .map_err(check_err)?;
            let extra = pipeline_summary(&o);
            finish_build(Certificate::Touching(o.rep), &out, extra)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Build { recipe } => build(recipe),
        Command::Verify { input, lax } => {
            let mode = if lax {
                ParseMode::Lax
            } else {
                ParseMode::Strict
            };
            let (cert, warnings) = read_cert(&input, mode)?;
            let (report, valid) = verify(&cert);
            emit(
                None,
                &json!({ "kind": cert.kind(), "valid": valid, "warnings": warnings, "report": report }),
            )?;
            if valid {
                Ok(())
            } else {
                Err(Failure::Check("certificate does not verify".into()))
            }
        }
        Command::Sample { input, grid, out } => {
            let e = read_envelope(&input)?;
            let o = fragility_sample(&e, grid.k, grid.seed).map_err(check_err)?;
            emit(out.as_deref(), &json!(o))?;
            if o.violations.is_empty() {
                Ok(())
            } else {
                Err(Failure::Check(format!(
                    "sample has violations: {:?}",
                    o.violations
                )))
            }
        }
        Command::Experiment {
            input,
            grid,
            samples,
            timing,
            out,
        } => {
            let e = read_envelope(&input)?;
            let start = Instant::now();
            let mut r = fragility_experiment(&e, grid.k, samples, grid.seed).map_err(check_err)?;
            if timing {
                r.wall_clock_ms = Some(start.elapsed().as_millis() as u64);
            }
            emit(out.as_deref(), &json!(r))?;
            if r.is_clean() {
                Ok(())
            } else {
                Err(Failure::Check(format!(
                    "{} sample violations",
                    r.violations.len()
                )))
            }
        }
        Command::Separate { input, grid, out } => {
            let e = read_envelope(&input)?;
            let s = balanced_separator(&e, grid.k, grid.seed).map_err(check_err)?;
            emit(out.as_deref(), &json!(s))?;
            if s.is_balanced() {
                Ok(())
            } else {
                Err(Failure::Check("separator is not balanced".into()))
            }
        }
        Command::Plot { input, out, axes } => {
            let r = read_touching(&input)?;
            let axes = match axes {
                Some(a) => (a[0], a[1]),
                None if r.dim <= 3 => (0, 1),
                None => return Err(Failure::Input(format!("dimension {} needs --axes", r.dim))),
            };
            let svg = plot::render(&r, axes).map_err(Failure::Input)?;
            write_text(&out, &svg)
        }
        Command::Info { input } => {
            let (cert, _) = read_cert(&input, ParseMode::Strict)?;
            let kind = cert.kind();
            let extra = match &cert {
                Certificate::CliqueSum(c) => {
                    json!({ "root": c.root.vertices(), "cliques": c.clique_points.len() })
                }
                Certificate::Envelope(e) => json!({ "s": e.s, "t": e.t }),
                Certificate::Touching(_) => json!({}),
            };
            let r = touching_of(cert);
            let clique = max_clique_size(&r.graph).ok();
            emit(
                None,
                &json!({
                    "kind": kind,
                    "n": r.n(),
                    "edges": r.graph.edge_count(),
                    "dim": r.dim,
                    "max_clique": clique,
                    "clique_cap": clique_cap(),
                    "details": extra,
                }),
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
