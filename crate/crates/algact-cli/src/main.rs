mod spec;

use algact::action::{Action, GElem};
use algact::analysis::{analyze, AnalysisOptions};
use algact::boundary::enumerate_boundary;
use algact::family::{self, GroupCoset, Subgroup};
use algact::groupoid::proper_infiniteness_witness;
use algact::matrix::int;
use algact::report::StructuralReport;
use clap::{Parser, Subcommand};
use spec::{ActionSpecFile, SpecError};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

const EXIT_INVALID_ACTION: u8 = 2;
const EXIT_SCHEMA: u8 = 3;

#[derive(Parser)]
#[command(
    name = "algact",
    about = "Exact structural analysis of algebraic actions of monoids on groups",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run all checks and write report.json and report.txt.
    Analyze {
        spec: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        word_bound: Option<usize>,
        /// Output directory for report.json / report.txt.
        #[arg(short, long, default_value = ".")]
        out: PathBuf,
        /// Override the report.json path.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// List the generated constructible subgroups with provenance and index.
    Constructibles {
        spec: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
        /// Write the Hasse diagram in DOT format to this path.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Enumerate the finite boundary model over the generated family.
    Boundary {
        spec: PathBuf,
        /// Generation depth of the family used as the level.
        #[arg(long)]
        level: Option<usize>,
        /// Override the boundary.json path (default: stdout).
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Build and verify the two-compression witness for a target set.
    Witness {
        spec: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        word_bound: Option<usize>,
        /// Target base subgroup: index into the constructibles listing
        /// (default: G itself).
        #[arg(long)]
        target: Option<usize>,
        /// Comma-separated coset representative for the target.
        #[arg(long)]
        target_rep: Option<String>,
        /// Excluded cosets, repeatable: a member index, optionally with a
        /// representative as INDEX@c1,c2,...
        #[arg(long = "exclude")]
        exclude: Vec<String>,
        /// Override the witness.json path (default: stdout).
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Re-render an existing report.json as text.
    Report { report: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Schema(msg)) => {
            eprintln!("schema error: {}", msg);
            ExitCode::from(EXIT_SCHEMA)
        }
        Err(CliError::InvalidAction(msg)) => {
            eprintln!("invalid action: {}", msg);
            ExitCode::from(EXIT_INVALID_ACTION)
        }
        Err(CliError::Other(msg)) => {
            eprintln!("error: {}", msg);
            ExitCode::FAILURE
        }
    }
}

enum CliError {
    Schema(String),
    InvalidAction(String),
    Other(String),
}

impl From<SpecError> for CliError {
    fn from(e: SpecError) -> Self {
        match e {
            SpecError::Schema(m) => CliError::Schema(m),
            SpecError::InvalidAction(m) => CliError::InvalidAction(m),
        }
    }
}

impl From<algact::Error> for CliError {
    fn from(e: algact::Error) -> Self {
        match e {
            algact::Error::InvalidAction(m) => CliError::InvalidAction(m),
            algact::Error::SingularMatrix => {
                CliError::InvalidAction("singular generator matrix".into())
            }
            other => CliError::Other(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

fn load(path: &Path) -> Result<(Action, AnalysisOptions), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Other(format!("cannot read {}: {}", path.display(), e)))?;
    let file = ActionSpecFile::parse(&text)?;
    let action = file.to_action()?;
    Ok((action, file.options()))
}

/// ALGACT_MAX_DEPTH is a global cap applied after flag overrides.
fn apply_depth_cap(opts: &mut AnalysisOptions) {
    if let Ok(cap) = std::env::var("ALGACT_MAX_DEPTH") {
        if let Ok(cap) = cap.parse::<usize>() {
            opts.depth = opts.depth.min(cap);
            opts.level = opts.level.min(cap);
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze {
            spec,
            depth,
            word_bound,
            out,
            json,
        } => {
            let (action, mut opts) = load(&spec)?;
            if let Some(d) = depth {
                opts.depth = d;
            }
            if let Some(w) = word_bound {
                opts.word_bound = w;
            }
            apply_depth_cap(&mut opts);
            let started = Instant::now();
            let report = analyze(&action, &opts)?;
            eprintln!("analysis took {} ms", started.elapsed().as_millis());
            std::fs::create_dir_all(&out)?;
            let json_path = json.unwrap_or_else(|| out.join("report.json"));
            std::fs::write(&json_path, report.to_json())?;
            std::fs::write(out.join("report.txt"), report.render_text())?;
            println!("{}", report.render_text());
            Ok(())
        }
        Command::Constructibles { spec, depth, dot } => {
            let (action, mut opts) = load(&spec)?;
            if let Some(d) = depth {
                opts.depth = d;
            }
            apply_depth_cap(&mut opts);
            algact::action::validate(&action, opts.word_bound)?;
            let fam = family::generate(&action, opts.depth);
            println!(
                "constructible subgroups at depth {} ({} members, stabilized = {}):",
                opts.depth,
                fam.members.len(),
                fam.stabilized
            );
            for (m, idx) in fam.sorted_by_index(&action) {
                println!(
                    "  [G:C] = {:<10} {}  ⟵  {}",
                    idx.to_string(),
                    m.describe(&action),
                    fam.provenance
                        .get(&m)
                        .map(|p| p.describe(&action))
                        .unwrap_or_default()
                );
            }
            let orbits = family::ie_orbits(&action, &fam, opts.word_bound.min(3));
            println!("orbits of the generator moves (the orbit index set): {}", orbits.len());
            for (i, orbit) in orbits.iter().enumerate() {
                let names: Vec<String> = orbit.iter().map(|m| m.describe(&action)).collect();
                println!("  orbit {}: {}", i, names.join(", "));
            }
            if let Some(dot_path) = dot {
                std::fs::write(&dot_path, family::to_dot(&action, &fam))?;
                println!("wrote {}", dot_path.display());
            }
            Ok(())
        }
        Command::Boundary { spec, level, json } => {
            let (action, mut opts) = load(&spec)?;
            if let Some(l) = level {
                opts.level = l;
            }
            apply_depth_cap(&mut opts);
            algact::action::validate(&action, opts.word_bound)?;
            let fam = family::generate(&action, opts.level);
            let boundary = enumerate_boundary(&action, &fam).map_err(|e| match e {
                algact::Error::InfiniteIndexMember(m) => CliError::Other(format!(
                    "the level family contains members of infinite index and has no finite boundary model: {}",
                    m
                )),
                other => CliError::from(other),
            })?;
            let mut rendered = serde_json::to_string_pretty(&boundary.to_json(&action))
                .expect("boundary serializes");
            rendered.push('\n');
            match json {
                Some(p) => {
                    std::fs::write(&p, rendered)?;
                    println!(
                        "wrote {} ({} points at level {})",
                        p.display(),
                        boundary.points.len(),
                        opts.level
                    );
                }
                None => print!("{}", rendered),
            }
            Ok(())
        }
        Command::Witness {
            spec,
            depth,
            word_bound,
            target,
            target_rep,
            exclude,
            json,
        } => {
            let (action, mut opts) = load(&spec)?;
            if let Some(d) = depth {
                opts.depth = d;
            }
            if let Some(w) = word_bound {
                opts.word_bound = w;
            }
            apply_depth_cap(&mut opts);
            algact::action::validate(&action, opts.word_bound)?;
            let fam = family::generate(&action, opts.depth);
            let base = match target {
                None => Subgroup::full(&action),
                Some(i) => fam
                    .members
                    .get(i)
                    .cloned()
                    .ok_or_else(|| CliError::Other(format!("target index {} out of range", i)))?,
            };
            let rep = match (&action, target_rep) {
                (_, None) => action.identity_elem(),
                (Action::Matrix(a), Some(csv)) => {
                    let parts: Result<Vec<i64>, _> =
                        csv.split(',').map(|p| p.trim().parse::<i64>()).collect();
                    let parts =
                        parts.map_err(|e| CliError::Other(format!("bad --target-rep: {}", e)))?;
                    if parts.len() != a.dim {
                        return Err(CliError::Other(format!(
                            "--target-rep needs {} coordinates",
                            a.dim
                        )));
                    }
                    GElem::Vec(parts.into_iter().map(int).collect())
                }
                (Action::Shift(_), Some(_)) => {
                    return Err(CliError::Other(
                        "--target-rep is only supported for the matrix backend".into(),
                    ))
                }
            };
            let target_coset = GroupCoset::new(&action, rep, base);
            let mut exclusions = Vec::new();
            for e in &exclude {
                let (idx_str, rep_str) = match e.split_once('@') {
                    Some((i, r)) => (i, Some(r)),
                    None => (e.as_str(), None),
                };
                let idx: usize = idx_str
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Other(format!("bad --exclude index {:?}", e)))?;
                let sub = fam
                    .members
                    .get(idx)
                    .cloned()
                    .ok_or_else(|| CliError::Other(format!("--exclude index {} out of range", idx)))?;
                let erep = match (&action, rep_str) {
                    (_, None) => action.identity_elem(),
                    (Action::Matrix(a), Some(csv)) => {
                        let parts: Result<Vec<i64>, _> =
                            csv.split(',').map(|p| p.trim().parse::<i64>()).collect();
                        let parts = parts
                            .map_err(|er| CliError::Other(format!("bad --exclude rep: {}", er)))?;
                        if parts.len() != a.dim {
                            return Err(CliError::Other(format!(
                                "--exclude rep needs {} coordinates",
                                a.dim
                            )));
                        }
                        GElem::Vec(parts.into_iter().map(int).collect())
                    }
                    (Action::Shift(_), Some(_)) => {
                        return Err(CliError::Other(
                            "--exclude representatives are only supported for the matrix backend"
                                .into(),
                        ))
                    }
                };
                exclusions.push(GroupCoset::new(&action, erep, sub));
            }
            let witness =
                proper_infiniteness_witness(&action, &fam, &target_coset, &exclusions, opts.word_bound.min(4))?;
            let describe_bisection = |b: &algact::groupoid::Bisection| {
                let range = b
                    .iso
                    .image(&action)
                    .map(|r| r.describe(&action))
                    .unwrap_or_else(|| "∅".into());
                serde_json::json!({
                    "base": b.base.describe(&action),
                    "range": range,
                })
            };
            let out = serde_json::json!({
                "target": target_coset.describe(&action),
                "branch": witness.certificate.branch,
                "u": witness.u.iter().map(&describe_bisection).collect::<Vec<_>>(),
                "v": witness.v.iter().map(&describe_bisection).collect::<Vec<_>>(),
                "certificate": {
                    "verified": witness.certificate.verified(),
                    "sources_cover_target": witness.certificate.sources_cover_target,
                    "ranges_pairwise_disjoint": witness.certificate.ranges_pairwise_disjoint,
                    "ranges_inside_target": witness.certificate.ranges_inside_target,
                    "range_maps_injective": witness.certificate.range_maps_injective,
                    "level_points": witness.certificate.level_points,
                    "source_point_count": witness.certificate.source_point_count,
                    "range_u_point_count": witness.certificate.range_u_point_count,
                    "range_v_point_count": witness.certificate.range_v_point_count,
                }
            });
            let mut rendered = serde_json::to_string_pretty(&out).expect("witness serializes");
            rendered.push('\n');
            match json {
                Some(p) => {
                    std::fs::write(&p, rendered)?;
                    println!("wrote {}", p.display());
                }
                None => print!("{}", rendered),
            }
            Ok(())
        }
        Command::Report { report } => {
            let text = std::fs::read_to_string(&report)
                .map_err(|e| CliError::Other(format!("cannot read {}: {}", report.display(), e)))?;
            let parsed = StructuralReport::from_json(&text)
                .map_err(|e| CliError::Schema(format!("not a report file: {}", e)))?;
            print!("{}", parsed.render_text());
            Ok(())
        }
    }
}
