use std::io::{IsTerminal, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use linrepair::blocks::{check_block_intersection_bound, parse_family};
use linrepair::code::{ArrayCode, MdsVerdict, DEFAULT_MDS_CAP};
use linrepair::constructions::{
    build_exceptional, build_two_parity_code, regular_spread_converse_check, Construction, ExceptionalCase,
};
use linrepair::field::Extension;
use linrepair::geometry::{desarguesian_spread, is_spread, LineIndex, Pg3, SpreadVerdict, TripleMode};
use linrepair::linalg::DEFAULT_ENUMERATION_BUDGET;
use linrepair::repair::{counting_bound, optimal_alpha, repair_report, verify_strictness_sweep};
use linrepair::sim::simulate;

#[derive(Parser)]
#[command(name = "linrepair", version, about = "Repair bandwidth and I/O of linear MDS array codes")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Table)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Print ℓ(n−1) − (q^{(r−1)ℓ} − 1)/(q − 1).
    Bound {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        ell: u32,
        #[arg(long)]
        q: u32,
    },
    /// Build an attaining two-parity code and write it as JSON.
    #[command(subcommand)]
    Construct(Construct),
    #[command(subcommand)]
    Verify(Verify),
    #[command(subcommand)]
    Repair(Repair),
    #[command(subcommand)]
    Geometry(Geometry),
    #[command(subcommand)]
    Check(Check),
    #[command(subcommand)]
    Simulate(Simulate),
}

#[derive(Args)]
struct CodeArg {
    /// Code file; `-` or absent reads standard input.
    #[arg(long)]
    code: Option<PathBuf>,
}

#[derive(Args)]
struct BudgetArg {
    /// Maximum number of candidate repair subspaces to score.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET as u64, value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,
}

#[derive(Subcommand)]
enum Construct {
    /// Nodes on the Desarguesian spread of GF(q^ℓ)².
    Desarguesian {
        #[arg(long)]
        q: u32,
        #[arg(long, default_value_t = 2)]
        ell: u32,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One of q3n6, q3n7, q4n9.
    Exceptional {
        #[arg(long = "case")]
        case: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Verify {
    /// Check that every r blocks of H are invertible.
    Mds {
        #[command(flatten)]
        code: CodeArg,
    },
}

#[derive(Subcommand)]
enum Repair {
    /// Exhaustive optimal bandwidth and I/O for every node.
    Analyze {
        #[command(flatten)]
        code: CodeArg,
        #[command(flatten)]
        budget: BudgetArg,
    },
}

#[derive(Subcommand)]
enum Geometry {
    /// Check that the Desarguesian spread, or a code's node subspaces, partition the points.
    SpreadCheck {
        #[arg(long)]
        q: Option<u32>,
        #[arg(long, default_value_t = 2)]
        ell: u32,
        /// Check this code's node subspaces instead.
        #[arg(long)]
        code: Option<PathBuf>,
    },
    /// The regulus through three members of the Desarguesian line spread of PG(3,q).
    Regulus {
        #[arg(long)]
        q: u32,
        /// Three member indices, e.g. `0,1,inf`.
        #[arg(long, value_delimiter = ',', default_values_t = vec!["0".to_string(), "1".to_string(), "inf".to_string()])]
        lines: Vec<String>,
    },
    /// Regularity of the Desarguesian spread of PG(3,q), or of the spread with one regulus reversed.
    Regular {
        #[arg(long)]
        q: u32,
        #[arg(long)]
        replace_regulus: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum Check {
    /// Block-intersection bound on a family file (one block per line).
    #[command(name = "lemma-c1")]
    LemmaC1 {
        #[arg(long)]
        family: PathBuf,
    },
    /// Random MDS codes with r ≥ 3, ℓ ≥ 2 never meet the counting bound.
    Strictness {
        #[arg(long, default_value_t = 2)]
        q: u32,
        #[arg(long, default_value_t = 2)]
        ell: usize,
        #[arg(long, default_value_t = 3)]
        r: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        budget: BudgetArg,
    },
    /// Attainment on the Desarguesian line spread, above and below the threshold length.
    Converse {
        #[arg(long)]
        q: u32,
        /// Lengths with more line subsets than this are sampled.
        #[arg(long, default_value_t = 5000)]
        exhaustive_cap: u64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        budget: BudgetArg,
    },
}

#[derive(Subcommand)]
enum Simulate {
    /// Erase a node and rebuild it with its bandwidth-optimal scheme.
    Repair {
        #[command(flatten)]
        code: CodeArg,
        #[arg(long)]
        node: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[command(flatten)]
        budget: BudgetArg,
    },
}

/// Result of a subcommand: report text and whether the checked statement held.
struct Outcome {
    text: String,
    verified: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, verified: true }
    }
}

fn read_code(arg: &CodeArg) -> anyhow::Result<ArrayCode> {
    let text = match &arg.code {
        Some(p) if p.as_os_str() != "-" => {
            std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?
        }
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).context("reading code from standard input")?;
            s
        }
    };
    Ok(ArrayCode::from_json(&text)?)
}

fn write_code(c: &Construction, out: &Option<PathBuf>) -> anyhow::Result<Outcome> {
    let json = c.code.to_json();
    match out {
        Some(p) => {
            std::fs::write(p, &json).with_context(|| format!("writing {}", p.display()))?;
            Ok(Outcome::ok(format!("wrote ({}, {}, {}) code to {}\n", c.code.n(), c.code.k(), c.code.ell(), p.display())))
        }
        None => Ok(Outcome::ok(json + "\n")),
    }
}

fn verdict(word: bool) -> String {
    let plain = if word { "PASS" } else { "FAIL" };
    if std::env::var_os("NO_COLOR").is_some() || !std::io::stdout().is_terminal() {
        return plain.to_string();
    }
    let color = if word { 32 } else { 31 };
    format!("\x1b[{color}m{plain}\x1b[0m")
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let format = cli.format;
    match cli.command {
        Command::Bound { n, r, ell, q } => {
            let b = counting_bound(n, r, ell, q)?;
            Ok(Outcome::ok(match format {
                Format::Table => format!("{b}\n"),
                Format::Csv => format!("n,r,ell,q,bound\n{n},{r},{ell},{q},{b}\n"),
                Format::Json => format!("{}\n", serde_json::json!({"n": n, "r": r, "ell": ell, "q": q, "bound": b})),
            }))
        }
        Command::Construct(Construct::Desarguesian { q, ell, n, out }) => {
            write_code(&build_two_parity_code(q, ell, n)?, &out)
        }
        Command::Construct(Construct::Exceptional { case, out }) => {
            let case: ExceptionalCase = case.parse()?;
            write_code(&build_exceptional(case)?, &out)
        }
        Command::Verify(Verify::Mds { code }) => {
            let code = read_code(&code)?;
            match code.is_mds(DEFAULT_MDS_CAP)? {
                MdsVerdict::Mds => Ok(Outcome::ok(format!(
                    "MDS: every {}-subset of blocks is invertible ({} nodes)\n",
                    code.r(),
                    code.n()
                ))),
                MdsVerdict::Fails { subset } => Ok(Outcome {
                    text: format!("NOT MDS: blocks {subset:?} do not form an invertible matrix\n"),
                    verified: false,
                }),
                MdsVerdict::NotVerified { subsets, cap } => {
                    bail!("{subsets} subsets exceed the cap of {cap}; MDS property not verified")
                }
            }
        }
        Command::Repair(Repair::Analyze { code, budget }) => {
            let code = read_code(&code)?;
            let rep = repair_report(&code, budget.budget as u128)?;
            let text = match format {
                Format::Table => rep.to_table(),
                Format::Csv => rep.to_csv(),
                Format::Json => serde_json::to_string_pretty(&rep)? + "\n",
            };
            Ok(Outcome { text, verified: rep.violations.is_empty() })
        }
        Command::Geometry(g) => geometry(g, format),
        Command::Check(c) => check(c, format),
        Command::Simulate(Simulate::Repair { code, node, seed, trials, budget }) => {
            let code = read_code(&code)?;
            let (_, witness) = optimal_alpha(&code, node, budget.budget as u128)?;
            let s = simulate(&code, &witness, trials, seed)?;
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&s)? + "\n",
                Format::Csv => format!(
                    "node,trials,exact,downloaded,accessed,analytic_bandwidth,analytic_io\n{},{},{},{},{},{},{}\n",
                    s.node, s.trials, s.exact, s.downloaded, s.accessed, s.analytic_bandwidth, s.analytic_io
                ),
                Format::Table => s.to_text() + &format!("verdict: {}\n", verdict(s.passed())),
            };
            Ok(Outcome { text, verified: s.passed() })
        }
    }
}

fn geometry(g: Geometry, format: Format) -> anyhow::Result<Outcome> {
    match g {
        Geometry::SpreadCheck { q, ell, code } => {
            let (field, members, what) = match (code, q) {
                (Some(p), _) => {
                    let c = read_code(&CodeArg { code: Some(p) })?;
                    if c.r() != 2 {
                        bail!("node subspaces form a spread only for two parities, got r = {}", c.r());
                    }
                    (c.field().clone(), c.node_subspaces().to_vec(), "code node subspaces".to_string())
                }
                (None, Some(q)) => {
                    let ext = Extension::standard(q, ell)?;
                    let s = desarguesian_spread(&ext);
                    (ext.base().clone(), s.spread.members, format!("Desarguesian spread q={q} ℓ={ell}"))
                }
                (None, None) => bail!("give --q or --code"),
            };
            let v = is_spread(&field, &members)?;
            let text = match (&v, format) {
                (_, Format::Json) => format!(
                    "{}\n",
                    serde_json::json!({"subject": what, "members": members.len(), "spread": v.is_spread(), "detail": format!("{v:?}")})
                ),
                (SpreadVerdict::Spread, _) => format!("{what}: {} members, spread {}\n", members.len(), verdict(true)),
                (other, _) => format!("{what}: {} members, spread {} ({other:?})\n", members.len(), verdict(false)),
            };
            Ok(Outcome { text, verified: v.is_spread() })
        }
        Geometry::Regulus { q, lines } => {
            let ext = Extension::standard(q, 2)?;
            let spread = desarguesian_spread(&ext);
            if lines.len() != 3 {
                bail!("--lines takes exactly three indices, got {}", lines.len());
            }
            let pg = Pg3::new(ext.base().clone())?;
            let picked = lines
                .iter()
                .map(|s| {
                    let idx: LineIndex = s.parse()?;
                    spread.member(idx).cloned().ok_or_else(|| anyhow::anyhow!("no spread member {s}"))
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            let reg = pg.regulus_through(&picked[0], &picked[1], &picked[2])?;
            let members: Vec<String> = reg
                .lines
                .iter()
                .map(|l| match spread.spread.members.iter().position(|m| m == l) {
                    Some(i) => spread.labels[i].to_string(),
                    None => format!("{:?}", l.basis().row_vecs()),
                })
                .collect();
            let text = match format {
                Format::Json => format!(
                    "{}\n",
                    serde_json::json!({"q": q, "lines": members, "transversals": reg.transversals.iter().map(|t| t.basis().row_vecs()).collect::<Vec<_>>()})
                ),
                _ => {
                    let mut t = format!("regulus through {}: {} lines\n", lines.join(","), reg.lines.len());
                    t.push_str(&format!("lines (spread indices): {}\n", members.join(" ")));
                    for tr in &reg.transversals {
                        t.push_str(&format!("transversal {:?}\n", tr.basis().row_vecs()));
                    }
                    t
                }
            };
            Ok(Outcome::ok(text))
        }
        Geometry::Regular { q, replace_regulus, seed } => {
            let ext = Extension::standard(q, 2)?;
            let pg = Pg3::new(ext.base().clone())?;
            let mut spread = desarguesian_spread(&ext).spread;
            if replace_regulus {
                let m = &spread.members;
                let reg = pg.regulus_through(&m[0], &m[1], &m[2])?;
                spread = pg.replace_regulus(&spread, &reg)?;
            }
            let rep = pg.is_regular_spread(&spread, TripleMode::auto(q, seed))?;
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&rep)? + "\n",
                _ => format!(
                    "regular: {} ({:?}, {} triples, failing {:?})\n",
                    rep.regular, rep.mode, rep.triples_checked, rep.failing_triple
                ),
            };
            // Reversing a regulus is expected to break regularity for q ≥ 3.
            let verified = if replace_regulus { q == 2 || !rep.regular } else { rep.regular };
            Ok(Outcome { text, verified })
        }
    }
}

fn check(c: Check, format: Format) -> anyhow::Result<Outcome> {
    match c {
        Check::LemmaC1 { family } => {
            let text = std::fs::read_to_string(&family).with_context(|| format!("reading {}", family.display()))?;
            let fam = parse_family(&text)?;
            let r = check_block_intersection_bound(&fam);
            if let Some(v) = &r.hypothesis_violation {
                bail!("hypothesis violated: {v}; conclusion not asserted");
            }
            let holds = r.holds == Some(true);
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&r)? + "\n",
                _ => format!(
                    "t={} union={} required={} certificate={:?} {}\n",
                    r.t,
                    r.n_effective,
                    r.required,
                    r.certificate,
                    verdict(holds)
                ),
            };
            Ok(Outcome { text, verified: holds })
        }
        Check::Strictness { q, ell, r, trials, seed, budget } => {
            let s = verify_strictness_sweep(q, ell, r, trials, seed, budget.budget as u128)?;
            let ok = s.equality_cases == 0 && s.violations.is_empty() && s.codes_tested >= trials;
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&s)? + "\n",
                _ => format!(
                    "codes tested: {}\nper length: {:?}\nno code found for: {:?}\nmin slack: {:?}\nequality cases: {}\nviolations: {}\n{}\n",
                    s.codes_tested,
                    s.per_length,
                    s.generation_failures,
                    s.min_slack,
                    s.equality_cases,
                    s.violations.len(),
                    verdict(ok)
                ),
            };
            Ok(Outcome { text, verified: ok })
        }
        Check::Converse { q, exhaustive_cap, samples, seed, budget } => {
            let rep = regular_spread_converse_check(q, exhaustive_cap as u128, samples, seed, budget.budget as u128)?;
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&rep)? + "\n",
                _ => {
                    let mut t = format!("q={q} admissible lengths {}..={}\n", rep.threshold, rep.max_n);
                    for a in &rep.admissible {
                        t.push_str(&format!("n={} lines in spread={} attained={}\n", a.n, a.lines_in_spread, a.attained));
                    }
                    for b in &rep.below {
                        t.push_str(&format!(
                            "n={} {:?}: {} subsets, {} with an attaining node, {} meeting the bound\n",
                            b.n, b.mode, b.subsets_checked, b.codes_with_attaining_node, b.codes_all_attaining
                        ));
                    }
                    t.push_str(&format!("{}\n", verdict(rep.holds())));
                    t
                }
            };
            Ok(Outcome { text, verified: rep.holds() })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(out.text.as_bytes());
            if out.verified {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
