//! Command-line driver: space generation, norm and witness queries,
//! certification, refutation, the positive constructions, and net
//! extraction, glued into reproducible runs.
//!
//! Exit codes: 0 success or certified, 1 violation or refutation found
//! (with the witness emitted), 2 input or precondition error, 3 internal
//! consistency failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use lip0_core::certify::{certify_c0, CertifyOutcome};
use lip0_core::constructions::{
    case1_select, gamma_compose, spike_family, tent_family, SpikeSpec, TentSpec,
};
use lip0_core::error::Error;
use lip0_core::generator::SpaceGenerator;
use lip0_core::io::{
    emit_json, family_to_file, parse_family_file, parse_space_file, realize_family, SpaceFile,
};
use lip0_core::lip::FunctionFamily;
use lip0_core::metric::FiniteMetricSpace;
use lip0_core::petr::{discreteness_check, petr_extract, PetrState};
use lip0_core::rat::{decimal_approx, format_rat, parse_rat, rint, Rat};
use lip0_core::refuter::{attack, shared_zero_attack, AttackOutcome, SpaceKindMode};
use lip0_core::selfcheck;

#[derive(Parser)]
#[command(name = "lip0", version, about = "Exact certificates and refutations for c0 embeddings into strongly norm-attaining Lipschitz functions")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct OutArg {
    /// Write the report or file here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Emit a space file from a generator truncation.
    Gen {
        /// Generator kind: ud | proper | harmonic | triple_cluster |
        /// shrinking | disjoint_sum (long names accepted).
        #[arg(long)]
        kind: String,
        /// Truncation size, counting the base point.
        #[arg(long)]
        n: usize,
        /// Cross-part gap of disjoint_sum (default 3/1).
        #[arg(long)]
        gap: Option<String>,
        /// Emit the generator form instead of the explicit matrix.
        #[arg(long)]
        as_generator: bool,
        #[command(flatten)]
        out: OutArg,
    },
    /// Lipschitz norms of the members of a family.
    Lipnorm {
        #[arg(long)]
        family: PathBuf,
        /// Space file overriding the family's own space reference.
        #[arg(long)]
        space: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Strong-attainment witness pairs of the members of a family.
    Sna {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        space: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Decide the exact isometric-c0 property of a family.
    Certify {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        space: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Search for a norm-inflating combination.
    Refute {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        space: Option<PathBuf>,
        /// ud | proper | generic | shared-zero
        #[arg(long, default_value = "generic")]
        mode: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// Build the tent family over explicit pairs.
    Tent {
        #[arg(long)]
        space: PathBuf,
        /// Pairs as "x1:y1,x2:y2,...".
        #[arg(long)]
        pairs: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// Build the spike family over explicit pairs.
    Spike {
        #[arg(long)]
        space: PathBuf,
        /// Pairs as "a1:b1,a2:b2,...".
        #[arg(long)]
        pairs: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// Greedy anchor selection with satellites, then tents.
    Case1 {
        /// Number of anchor/satellite pairs to select.
        #[arg(long)]
        count: usize,
        /// Generator-form space file of kind shrinking_satellites
        /// (defaults to the built-in parameters).
        #[arg(long)]
        space: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Compose net extraction with tents: one tent per cluster mark.
    Gamma {
        #[arg(long)]
        space: PathBuf,
        /// Explicit marks "p1,p2,..."; omit to extract them first.
        #[arg(long)]
        marks: Option<String>,
        /// Extraction levels when marks are derived.
        #[arg(long)]
        levels: Option<usize>,
        /// Concentration quota when marks are derived (default 1/2).
        #[arg(long)]
        tau: Option<String>,
        /// Pairing radius for the tent partners.
        #[arg(long)]
        closeness: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// Extract a separated subset through the net hierarchy.
    Petr {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        levels: usize,
        /// Concentration quota in (0, 1], default 1/2.
        #[arg(long)]
        tau: Option<String>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Run the acceptance criteria.
    Selftest {
        /// Seed for the randomized suites.
        #[arg(long, default_value_t = 0x11905EED)]
        seed: u64,
        /// Run a single criterion (1-11) instead of all.
        #[arg(long)]
        criterion: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Internal(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn write_out(out: &OutArg, text: &str) -> Result<(), Error> {
    match &out.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_file(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))
}

fn load_space(path: &Path) -> Result<FiniteMetricSpace, Error> {
    parse_space_file(&read_file(path)?)?.realize()
}

fn load_family(family: &Path, space_override: &Option<PathBuf>) -> Result<FunctionFamily, Error> {
    let mut file = parse_family_file(&read_file(family)?)?;
    if let Some(space) = space_override {
        file.space = lip0_core::io::SpaceRef::Inline(parse_space_file(&read_file(space)?)?);
    }
    let base_dir = family.parent().map(Path::to_path_buf).unwrap_or_default();
    realize_family(&file, |rel| read_file(&base_dir.join(rel)))
}

fn parse_kind(kind: &str, gap: &Option<String>) -> Result<SpaceGenerator, Error> {
    let gap_rat = match gap {
        Some(g) => parse_rat(g)?,
        None => rint(3),
    };
    match kind {
        "ud" | "ud_counterexample" => Ok(SpaceGenerator::ud_counterexample()),
        "proper" | "proper_counterexample" => Ok(SpaceGenerator::proper_counterexample_default()),
        "harmonic" | "harmonic_sequence" => Ok(SpaceGenerator::harmonic_sequence()),
        "triple_cluster" | "cluster" => Ok(SpaceGenerator::triple_cluster()),
        "shrinking" | "shrinking_satellites" => Ok(SpaceGenerator::shrinking_satellites_default()),
        "disjoint_sum" | "sum" => {
            SpaceGenerator::disjoint_sum(SpaceGenerator::ud_counterexample(), 4, gap_rat)
        }
        other => Err(Error::Input(format!("unknown generator kind `{other}`"))),
    }
}

fn parse_pairs(spec: &str) -> Result<Vec<(String, String)>, Error> {
    spec.split(',')
        .map(|chunk| {
            chunk
                .trim()
                .split_once(':')
                .map(|(a, b)| (a.trim().to_string(), b.trim().to_string()))
                .ok_or_else(|| Error::Input(format!("malformed pair `{chunk}` (want x:y)")))
        })
        .collect()
}

fn rat_entry(x: &Rat) -> Value {
    json!({ "exact": format_rat(x), "decimal": decimal_approx(x, 6) })
}

fn family_report_entry(space: &FiniteMetricSpace, p: usize, q: usize) -> Value {
    json!([space.label(p), space.label(q)])
}

fn emit_family(
    family: &FunctionFamily,
    provenance: Value,
    out: &OutArg,
) -> Result<ExitCode, Error> {
    let mut file = family_to_file(family);
    file.provenance = Some(provenance);
    write_out(out, &emit_json(&file))?;
    Ok(ExitCode::SUCCESS)
}

fn run(cmd: Cmd) -> Result<ExitCode, Error> {
    match cmd {
        Cmd::Gen { kind, n, gap, as_generator, out } => {
            let gen = parse_kind(&kind, &gap)?;
            let file = if as_generator {
                // realize first so bad parameters are caught now
                gen.truncate(n)?;
                SpaceFile::generated(&gen, n)
            } else {
                SpaceFile::explicit(&gen.truncate(n)?)
            };
            write_out(&out, &emit_json(&file))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Lipnorm { family, space, out } => {
            let fam = load_family(&family, &space)?;
            let entries: Result<Vec<Value>, Error> = (0..fam.len())
                .map(|i| {
                    let f = fam.member(i);
                    Ok(json!({ "name": f.name(), "lip_norm": rat_entry(&f.lip_norm()?) }))
                })
                .collect();
            write_out(&out, &emit_json(&json!({ "functions": entries? })))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Sna { family, space, out } => {
            let fam = load_family(&family, &space)?;
            let space = Arc::clone(fam.space());
            let entries: Result<Vec<Value>, Error> = (0..fam.len())
                .map(|i| {
                    let f = fam.member(i);
                    let wits: Vec<Value> = f
                        .sna_witnesses()?
                        .iter()
                        .map(|w| family_report_entry(&space, w.p, w.q))
                        .collect();
                    Ok(json!({
                        "name": f.name(),
                        "lip_norm": rat_entry(&f.lip_norm()?),
                        "witnesses": wits,
                    }))
                })
                .collect();
            write_out(&out, &emit_json(&json!({ "functions": entries? })))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Certify { family, space, out } => {
            let fam = load_family(&family, &space)?;
            let space = Arc::clone(fam.space());
            match certify_c0(&fam) {
                Ok(CertifyOutcome::Certified(cert)) => {
                    let constancy: Vec<Value> = (0..fam.len())
                        .map(|i| {
                            let row: Vec<Value> = (0..fam.len())
                                .map(|j| match &cert.constancy.0[i][j] {
                                    Some(v) => Value::String(format_rat(v)),
                                    None => Value::Null,
                                })
                                .collect();
                            Value::Array(row)
                        })
                        .collect();
                    let attainment: Vec<Value> = cert
                        .attainment
                        .iter()
                        .map(|&(p, q)| family_report_entry(&space, p, q))
                        .collect();
                    let report = json!({
                        "verdict": "certified",
                        "members": fam.len(),
                        "checked_pairs": cert.checked_pairs,
                        "attainment": attainment,
                        "constancy": constancy,
                    });
                    write_out(&out, &emit_json(&report))?;
                    Ok(ExitCode::SUCCESS)
                }
                Ok(CertifyOutcome::Violated(v)) => {
                    let report = json!({
                        "verdict": "violated",
                        "pair": family_report_entry(&space, v.pair.0, v.pair.1),
                        "sign_vector": v.signs,
                        "excess": format_rat(&v.excess),
                    });
                    write_out(&out, &emit_json(&report))?;
                    Ok(ExitCode::from(1))
                }
                Err(Error::NotNormalized { member, norm }) => {
                    let report = json!({
                        "verdict": "not-normalized",
                        "member": member,
                        "lip_norm": norm,
                    });
                    write_out(&out, &emit_json(&report))?;
                    Ok(ExitCode::from(2))
                }
                Err(e) => Err(e),
            }
        }
        Cmd::Refute { family, space, mode, out } => {
            let fam = load_family(&family, &space)?;
            let outcome = match mode.as_str() {
                "ud" => attack(&fam, SpaceKindMode::Ud)?,
                "proper" => attack(&fam, SpaceKindMode::Proper)?,
                "generic" => attack(&fam, SpaceKindMode::Generic)?,
                "shared-zero" => shared_zero_attack(&fam)?,
                other => return Err(Error::Input(format!("unknown mode `{other}`"))),
            };
            let space = Arc::clone(fam.space());
            match outcome {
                AttackOutcome::Trace(t) => {
                    let report = json!({
                        "verdict": "refuted",
                        "mode": t.mode.name(),
                        "indices": t.indices.map(|(n0, m0)| json!([
                            fam.member(n0).name(), fam.member(m0).name()
                        ])),
                        "delta": t.delta,
                        "sign_vector": t.sign_vector,
                        "evaluation_pair": family_report_entry(&space, t.eval_pair.0, t.eval_pair.1),
                        "quotient": rat_entry(&t.quotient),
                        "constant": t.constant.as_ref().map(format_rat),
                        "margin": t.margin.as_ref().map(format_rat),
                    });
                    write_out(&out, &emit_json(&report))?;
                    Ok(ExitCode::from(1))
                }
                AttackOutcome::Inconclusive(r) => {
                    let failures: Vec<Value> = r
                        .failures
                        .iter()
                        .map(|f| {
                            json!({
                                "n0": fam.member(f.n0).name(),
                                "m0": f.m0.map(|m| fam.member(m).name().to_string()),
                                "reason": f.reason,
                            })
                        })
                        .collect();
                    let report = json!({
                        "verdict": "inconclusive",
                        "message": r.message,
                        "candidate_failures": failures,
                        "constancy_counterexample": r.constancy.map(|ce| json!({
                            "member": fam.member(ce.member).name(),
                            "owner": fam.member(ce.owner).name(),
                            "pair": family_report_entry(&space, ce.pair.0, ce.pair.1),
                            "values": [format_rat(&ce.values.0), format_rat(&ce.values.1)],
                        })),
                    });
                    write_out(&out, &emit_json(&report))?;
                    Ok(ExitCode::SUCCESS)
                }
            }
        }
        Cmd::Tent { space, pairs, out } => {
            let sp = load_space(&space)?.arc();
            let parsed = parse_pairs(&pairs)?;
            let refs: Vec<(&str, &str)> =
                parsed.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
            let spec = TentSpec::from_labels(&sp, &refs)?;
            let fam = tent_family(Arc::clone(&sp), &spec)?;
            emit_family(&fam, json!({ "construction": "tent_family", "pairs": pairs }), &out)
        }
        Cmd::Spike { space, pairs, out } => {
            let sp = load_space(&space)?.arc();
            let parsed = parse_pairs(&pairs)?;
            let refs: Vec<(&str, &str)> =
                parsed.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
            let spec = SpikeSpec::from_labels(&sp, &refs)?;
            let fam = spike_family(Arc::clone(&sp), &spec)?;
            let provenance = json!({
                "construction": "spike_family",
                "pairs": pairs,
                "epsilons": spec.epsilons().iter().map(format_rat).collect::<Vec<_>>(),
            });
            emit_family(&fam, provenance, &out)
        }
        Cmd::Case1 { count, space, out } => {
            let gen = match space {
                None => SpaceGenerator::shrinking_satellites_default(),
                Some(path) => {
                    let file = parse_space_file(&read_file(&path)?)?;
                    match file.generator()? {
                        Some((g, _)) => g,
                        None => {
                            return Err(Error::Input(
                                "case1 needs a generator-form space file".into(),
                            ))
                        }
                    }
                }
            };
            let (selection, fam) = case1_select(&gen, count)?;
            let picks: Vec<Value> = selection
                .picks
                .iter()
                .map(|p| {
                    json!({
                        "anchor": p.anchor_label,
                        "satellite": p.satellite.label,
                        "base_distance": format_rat(&p.base_distance),
                        "radius": format_rat(&p.radius),
                        "margin": format_rat(&p.margin),
                    })
                })
                .collect();
            emit_family(
                &fam,
                json!({ "construction": "case1_select", "count": count, "picks": picks }),
                &out,
            )
        }
        Cmd::Gamma { space, marks, levels, tau, closeness, out } => {
            let sp = load_space(&space)?.arc();
            let closeness = parse_rat(&closeness)?;
            let mark_indices: Vec<usize> = match (marks, levels) {
                (Some(list), _) => list
                    .split(',')
                    .map(|m| sp.index_of(m.trim()))
                    .collect::<Result<_, _>>()?,
                (None, Some(levels)) => {
                    let tau = match &tau {
                        Some(t) => parse_rat(t)?,
                        None => lip0_core::rat::rat(1, 2),
                    };
                    let (l, _) = petr_extract(&sp, levels, &tau)?;
                    l
                }
                (None, None) => {
                    return Err(Error::Input(
                        "gamma needs either --marks or --levels to derive them".into(),
                    ))
                }
            };
            let fam = gamma_compose(Arc::clone(&sp), &mark_indices, &closeness)?;
            let provenance = json!({
                "construction": "gamma_compose",
                "marks": mark_indices.iter().map(|&i| sp.label(i)).collect::<Vec<_>>(),
                "closeness": format_rat(&closeness),
            });
            emit_family(&fam, provenance, &out)
        }
        Cmd::Petr { space, levels, tau, out } => {
            let sp = load_space(&space)?.arc();
            let tau = match &tau {
                Some(t) => parse_rat(t)?,
                None => lip0_core::rat::rat(1, 2),
            };
            let (l, state) = petr_extract(&sp, levels, &tau)?;
            let discrete = discreteness_check(&l, &state);
            let report = petr_report(&sp, &l, &state, discrete.ok);
            write_out(&out, &emit_json(&report))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Selftest { seed, criterion } => {
            let results = match criterion {
                Some(id) => vec![selfcheck::run(id, seed)?],
                None => selfcheck::run_all(seed),
            };
            let mut all_ok = true;
            for r in &results {
                println!("{}", r.line());
                all_ok &= r.passed;
            }
            if all_ok {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(3))
            }
        }
    }
}

fn petr_report(sp: &FiniteMetricSpace, l: &[usize], state: &PetrState, discrete: bool) -> Value {
    let labels = |set: &[usize]| -> Vec<&str> { set.iter().map(|&p| sp.label(p)).collect() };
    let levels: Vec<Value> = state
        .levels
        .iter()
        .map(|lvl| json!({ "k": lvl.k, "net_size": lvl.net.len(), "net": labels(&lvl.net) }))
        .collect();
    let steps: Vec<Value> = state
        .steps
        .iter()
        .map(|s| {
            json!({
                "target_level": s.target + 1,
                "case": if s.case_b.is_some() { "b" } else { "a" },
                "concentration": s.case_b.as_ref().map(|cb| json!({
                    "j0": cb.j0 + 1,
                    "center": sp.label(cb.alpha0),
                })),
                "ball_sizes": s.intersections.iter().map(|b| json!({
                    "level": b.level + 1,
                    "center": sp.label(b.center),
                    "size": b.size,
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "tau": format_rat(&state.tau),
        "levels": levels,
        "working_sets": state.working.iter().map(|w| labels(w)).collect::<Vec<_>>(),
        "steps": steps,
        "level_sets": state.l_sets.iter().map(|s| labels(s)).collect::<Vec<_>>(),
        "exclusions": state.n_sets.iter().map(|s| labels(s)).collect::<Vec<_>>(),
        "extracted": labels(l),
        "extracted_size": l.len(),
        "uniform_lower_bound": format_rat(&state.uniform_bound),
        "discrete": discrete,
    })
}
