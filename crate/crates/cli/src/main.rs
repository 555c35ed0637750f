use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use sepprod::axioms::{check_sproduct, weakly_connected, Covering};
use sepprod::characterization::{Characterizer, Step};
use sepprod::io::{product_document, product_from_document, to_dot, LatticeDocument};
use sepprod::morphisms::{enumerate_automorphisms, enumerate_orthocomplementations, factor_automorphism, AutoGroup, Xi};
use sepprod::product::{aerts_product_general, aerts_product_sharp, ProductLattice};
use sepprod::{AtomSet, LatticeSpec, Lattice, OrthoMap};

#[derive(Parser)]
#[command(name = "sepprod", version, about = "Finite lattices, separated products and their axioms")]
struct Cli {
    /// Print the report as JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a standard lattice.
    Build {
        #[command(subcommand)]
        kind: BuildKind,
        #[arg(short, long, global = true)]
        output: Option<PathBuf>,
    },
    /// Separated product of two lattices.
    Product {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, value_enum, default_value_t = RouteArg::Sharp)]
        route: RouteArg,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Structural checks on one lattice; all of them when no flag is given.
    Check {
        file: PathBuf,
        #[arg(long)]
        ortho: bool,
        #[arg(long)]
        orthomodular: bool,
        #[arg(long)]
        coatomistic: bool,
        #[arg(long)]
        covering_property: bool,
        #[arg(long)]
        weakly_connected: bool,
        /// Blocks as `0,1,2;2,3,4`; defaults to a heuristic search.
        #[arg(long, requires = "weakly_connected")]
        covering: Option<String>,
    },
    /// Axioms P0–P5 for a product document against its factors.
    SproductCheck {
        product: PathBuf,
        left: PathBuf,
        right: PathBuf,
        #[arg(long = "T", value_enum, default_value_t = GroupArg::Full)]
        t: GroupArg,
    },
    /// Automorphism group, optionally factored over a product.
    Aut {
        file: PathBuf,
        #[arg(long, num_args = 2, value_names = ["LEFT", "RIGHT"])]
        factor: Option<Vec<PathBuf>>,
        /// List every automorphism (or factorization).
        #[arg(long)]
        list: bool,
    },
    /// Search for orthocomplementations.
    OrthoSearch {
        file: PathBuf,
        #[arg(long)]
        limit: Option<usize>,
        /// Write the lattice once per orthocomplementation found.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Coatom-pair characterization of an orthocomplemented product.
    Characterize {
        product: PathBuf,
        left: PathBuf,
        right: PathBuf,
        /// Run with every orthocomplementation found by the search.
        #[arg(long)]
        all_orthos: bool,
    },
    /// Export the Hasse diagram.
    Export {
        file: PathBuf,
        #[arg(long, required = true)]
        dot: bool,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Subcommand)]
enum BuildKind {
    Mo { n: usize },
    Boolean { n: usize },
    Subspace { q: usize, d: usize },
    Two,
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Generators,
    Sharp,
}

#[derive(Clone, Copy, ValueEnum)]
enum GroupArg {
    Full,
    Id,
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Failure {
        Failure(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

fn read_doc(path: &Path) -> Result<LatticeDocument, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<(Lattice, Option<OrthoMap>, LatticeDocument), Failure> {
    let doc = read_doc(path)?;
    let (lat, ortho) = doc.to_lattice().map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    Ok((lat, ortho, doc))
}

fn load_product(product: &Path, left: &Path, right: &Path) -> Result<ProductLattice, Failure> {
    let (l, _, _) = load(left)?;
    let (r, _, _) = load(right)?;
    let doc = read_doc(product)?;
    product_from_document(&doc, &l, &r).map_err(|e| Failure(format!("{}: {e}", product.display())))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn emit(json_mode: bool, text: &str, value: Value) {
    if json_mode {
        println!("{}", serde_json::to_string_pretty(&value).expect("serializable"));
    } else {
        println!("{text}");
    }
}

fn status(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn parse_covering(spec: &str) -> Result<Covering, Failure> {
    let blocks = spec
        .split(';')
        .map(|block| {
            block
                .split(',')
                .map(|a| a.trim().parse::<usize>().map_err(|_| Failure(format!("bad atom index {a:?} in covering"))))
                .map(|a| a.and_then(|a| if a < 64 { Ok(a) } else { Err(Failure(format!("atom {a} out of range"))) }))
                .collect::<Result<AtomSet, Failure>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Covering::new(blocks))
}

fn cmd_build(kind: BuildKind, output: &Path) -> Outcome {
    let spec = match kind {
        BuildKind::Mo { n } => LatticeSpec::Mo { n },
        BuildKind::Boolean { n } => LatticeSpec::Boolean { n },
        BuildKind::Subspace { q, d } => LatticeSpec::Subspace { q, d },
        BuildKind::Two => LatticeSpec::Two,
    };
    let built = spec.build()?;
    let mut meta = Map::new();
    meta.insert("builder".into(), serde_json::to_value(spec)?);
    meta.insert("name".into(), json!(spec.name()));
    write_json(output, &LatticeDocument::from_lattice(&built.lattice, built.ortho.as_ref(), meta))?;
    Ok(true)
}

fn cmd_product(left: &Path, right: &Path, route: RouteArg, output: &Path) -> Outcome {
    let (l, lo, ld) = load(left)?;
    let (r, ro, rd) = load(right)?;
    let p = match route {
        RouteArg::Generators => aerts_product_general(&l, &r)?,
        RouteArg::Sharp => match (&lo, &ro) {
            (Some(o1), Some(o2)) => aerts_product_sharp(&l, o1, &r, o2)?,
            _ => return Err(Failure("sharp route needs orthocomplementations on both factors".into())),
        },
    };
    let mut meta = Map::new();
    for (key, doc) in [("left", &ld), ("right", &rd)] {
        if let Some(name) = doc.meta.get("name") {
            meta.insert(format!("{key}_name"), name.clone());
        }
    }
    write_json(output, &product_document(&p, meta))?;
    Ok(true)
}

struct CheckFlags {
    ortho: bool,
    orthomodular: bool,
    coatomistic: bool,
    covering_property: bool,
    weakly_connected: bool,
    covering: Option<String>,
}

fn cmd_check(file: &Path, flags: CheckFlags, json_mode: bool) -> Outcome {
    let (lat, ortho, _) = load(file)?;
    let all = !(flags.ortho || flags.orthomodular || flags.coatomistic || flags.covering_property || flags.weakly_connected);
    let mut lines = Vec::new();
    let mut report = Map::new();
    let mut ok = true;
    let mut add = |name: &str, passed: bool, detail: String, report: &mut Map<String, Value>| {
        ok &= passed;
        lines.push(format!("{name}: {}{}", status(passed), if detail.is_empty() { String::new() } else { format!(" ({detail})") }));
        report.insert(name.into(), json!({ "passed": passed, "detail": detail }));
    };
    if all || flags.ortho {
        add("ortho", ortho.is_some(), if ortho.is_some() { String::new() } else { "no orthocomplementation".into() }, &mut report);
    }
    if all || flags.orthomodular {
        match &ortho {
            Some(o) => {
                let w = o.orthomodularity_witness(&lat);
                add("orthomodular", w.is_none(), w.map(|(x, y)| format!("{x} ≤ {y}")).unwrap_or_default(), &mut report);
            }
            None => add("orthomodular", false, "no orthocomplementation".into(), &mut report),
        }
    }
    if all || flags.coatomistic {
        add("coatomistic", lat.is_coatomistic(), String::new(), &mut report);
    }
    if all || flags.covering_property {
        let w = lat.covering_property_witness();
        add("covering-property", w.is_none(), w.map(|(a, p)| format!("a={a}, p={p}")).unwrap_or_default(), &mut report);
    }
    if all || flags.weakly_connected {
        let cov = match &flags.covering {
            Some(spec) => parse_covering(spec)?,
            None => Covering::find(&lat).unwrap_or_else(|| Covering::whole(&lat)),
        };
        let r = weakly_connected(&lat, &cov)?;
        let detail = if !r.not_two {
            "L = 2".to_string()
        } else {
            [&r.cover, &r.third_atom, &r.chains]
                .iter()
                .find_map(|o| o.first_witness().map(|w| w.to_string()))
                .unwrap_or_default()
        };
        add("weakly-connected", r.passed(), detail, &mut report);
    }
    emit(json_mode, &lines.join("\n"), Value::Object(report));
    Ok(ok)
}

fn group(lat: &Lattice, t: GroupArg) -> Result<AutoGroup, Failure> {
    Ok(match t {
        GroupArg::Full => enumerate_automorphisms(lat)?,
        GroupArg::Id => AutoGroup::identity(lat.atom_count()),
    })
}

fn cmd_sproduct_check(product: &Path, left: &Path, right: &Path, t: GroupArg, json_mode: bool) -> Outcome {
    let p = load_product(product, left, right)?;
    let t1 = group(p.left(), t)?;
    let t2 = group(p.right(), t)?;
    let c1 = Covering::find(p.left()).unwrap_or_else(|| Covering::whole(p.left()));
    let c2 = Covering::find(p.right()).unwrap_or_else(|| Covering::whole(p.right()));
    let r = check_sproduct(&p, &t1, &t2, &c1, &c2)?;
    emit(json_mode, &r.to_string(), serde_json::to_value(&r)?);
    Ok(r.passed())
}

fn cmd_aut(file: &Path, factor: Option<Vec<PathBuf>>, list: bool, json_mode: bool) -> Outcome {
    let Some(factor) = factor else {
        let (lat, _, _) = load(file)?;
        let g = enumerate_automorphisms(&lat)?;
        let mut text = format!("automorphisms: {}", g.len());
        if list {
            for u in g.members() {
                text.push_str(&format!("\n{u}"));
            }
        }
        let perms: Vec<&[usize]> = g.members().iter().map(|u| u.perm()).collect();
        emit(json_mode, &text, json!({ "count": g.len(), "members": if list { json!(perms) } else { Value::Null } }));
        return Ok(true);
    };
    let p = load_product(file, &factor[0], &factor[1])?;
    let g = enumerate_automorphisms(p.base())?;
    let mut rows = Vec::new();
    let mut text = String::new();
    let (mut identity, mut swap, mut failed) = (0, 0, 0);
    for u in g.members() {
        match factor_automorphism(&p, u) {
            Ok(f) => {
                let recomposed = f.recompose(&p).is_some_and(|v| &v == u);
                if !recomposed {
                    failed += 1;
                }
                match f.xi {
                    Xi::Identity => identity += 1,
                    Xi::Swap => swap += 1,
                }
                if list {
                    text.push_str(&format!("{u} = {:?} u1={:?} u2={:?}\n", f.xi, f.u1, f.u2));
                }
                rows.push(json!({ "perm": u.perm(), "factorization": f, "recomposed": recomposed }));
            }
            Err(e) => {
                failed += 1;
                text.push_str(&format!("{u}: {e}\n"));
                rows.push(json!({ "perm": u.perm(), "error": e.to_string() }));
            }
        }
    }
    text.push_str(&format!(
        "automorphisms: {}\nfactor with ξ = id: {identity}\nfactor with ξ = (12): {swap}\nfailures: {failed}",
        g.len()
    ));
    emit(
        json_mode,
        &text,
        json!({ "count": g.len(), "identity": identity, "swap": swap, "failures": failed, "factorizations": if list { json!(rows) } else { Value::Null } }),
    );
    Ok(failed == 0)
}

fn cmd_ortho_search(file: &Path, limit: Option<usize>, output: Option<&Path>, json_mode: bool) -> Outcome {
    let (lat, _, doc) = load(file)?;
    let found = enumerate_orthocomplementations(&lat, limit)?;
    let docs: Vec<LatticeDocument> = found
        .iter()
        .map(|o| LatticeDocument::from_lattice(&lat, Some(o), doc.meta.clone()))
        .collect();
    if let Some(out) = output {
        write_json(out, &docs)?;
    }
    let exhaustive = limit.is_none_or(|l| found.len() < l);
    emit(
        json_mode,
        &format!("orthocomplementations: {}{}", found.len(), if exhaustive { " (exhaustive)" } else { " (limit reached)" }),
        json!({ "count": found.len(), "exhaustive": exhaustive, "documents": if output.is_none() { json!(docs) } else { Value::Null } }),
    );
    Ok(true)
}

fn cmd_characterize(product: &Path, left: &Path, right: &Path, all_orthos: bool, json_mode: bool) -> Outcome {
    let p = load_product(product, left, right)?;
    let orthos: Vec<OrthoMap> = if all_orthos {
        enumerate_orthocomplementations(p.base(), None)?
    } else {
        vec![p.ortho().cloned().ok_or_else(|| Failure("product document carries no orthocomplementation".into()))?]
    };
    let mut text = Vec::new();
    let mut runs = Vec::new();
    let mut ok = true;
    match Characterizer::new(&p) {
        Err(e) => {
            ok = false;
            text.push(format!("{}: FAIL ({})", Step::Preconditions, e.witness));
            runs.push(json!({ "failed_step": e.step, "witness": e.witness }));
        }
        Ok(c) => {
            for (i, o) in orthos.iter().enumerate() {
                if orthos.len() > 1 {
                    text.push(format!("orthocomplementation {i}:"));
                }
                match c.run(o) {
                    Ok(r) => {
                        for (step, outcome) in &r.steps {
                            text.push(format!("{step}: {outcome}"));
                        }
                        text.push(format!("f is the identity: {}", r.iso_is_identity));
                        runs.push(json!({
                            "steps": r.steps,
                            "iso_is_identity": r.iso_is_identity,
                            "induced_ortho1": r.induced_ortho1,
                            "induced_ortho2": r.induced_ortho2,
                        }));
                    }
                    Err(e) => {
                        ok = false;
                        for step in Step::ALL.iter().take_while(|&&s| s != e.step) {
                            text.push(format!("{step}: pass"));
                        }
                        text.push(format!("{}: FAIL ({})", e.step, e.witness));
                        runs.push(json!({ "failed_step": e.step, "witness": e.witness }));
                    }
                }
            }
        }
    }
    emit(json_mode, &text.join("\n"), json!({ "passed": ok, "runs": runs }));
    Ok(ok)
}

fn cmd_export(file: &Path, output: &Path) -> Outcome {
    let (lat, ortho, _) = load(file)?;
    fs::write(output, to_dot(&lat, ortho.as_ref())).map_err(|e| Failure(format!("{}: {e}", output.display())))?;
    Ok(true)
}

fn run(cli: Cli) -> Outcome {
    let json_mode = cli.json;
    match cli.command {
        Command::Build { kind, output } => match output {
            Some(output) => cmd_build(kind, &output),
            None => Err(Failure("build needs an output file (-o FILE)".into())),
        },
        Command::Product { left, right, route, output } => cmd_product(&left, &right, route, &output),
        Command::Check {
            file,
            ortho,
            orthomodular,
            coatomistic,
            covering_property,
            weakly_connected,
            covering,
        } => cmd_check(
            &file,
            CheckFlags {
                ortho,
                orthomodular,
                coatomistic,
                covering_property,
                weakly_connected,
                covering,
            },
            json_mode,
        ),
        Command::SproductCheck { product, left, right, t } => cmd_sproduct_check(&product, &left, &right, t, json_mode),
        Command::Aut { file, factor, list } => cmd_aut(&file, factor, list, json_mode),
        Command::OrthoSearch { file, limit, output } => cmd_ortho_search(&file, limit, output.as_deref(), json_mode),
        Command::Characterize {
            product,
            left,
            right,
            all_orthos,
        } => cmd_characterize(&product, &left, &right, all_orthos, json_mode),
        Command::Export { file, dot: _, output } => cmd_export(&file, &output),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure(msg)) => {
            eprintln!("error: {}", msg.replace('\n', " "));
            ExitCode::from(2)
        }
    }
}
