//! The `reducts` command line. Every subcommand builds a [`Report`] that is
//! printed either as text or as JSON; both come from the same values.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use reducts::canonical::CATALOG;
use reducts::classifiers::{
    cameron_class, equality_csp, graph_monoid_case, temporal_csp, thomas_class, Evidence,
    TemporalCsp,
};
use reducts::definability::{decide_ep, decide_pp, DefinabilityCaps, DefinabilityVerdict};
use reducts::formulas::{default_vars, parse_qf_in, render, BUILTINS};
use reducts::interp::{hardness_chain, interpretation, interpretation_names, verify_interpretation};
use reducts::ppalg::{solve_csp, CspInstance, CspInstanceJson, CspResult};
use reducts::ramsey::{
    arrows, minimal_product_sizes, parse_structure, product_arrows, ArrowCaps, ArrowQuery,
    ArrowReport, ProductQuery,
};
use reducts::{Base, Language, Relation};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_INCONCLUSIVE: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "reducts", version, about = "Workbench for reducts of (Q;<) and the random graph")]
pub struct Cli {
    /// Print the report as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Threads for the searches that can split (1 = sequential).
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Search nodes per search.
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Normalize a quantifier-free formula, or a whole language file.
    Parse(ParseArgs),
    /// Run one of the classifiers on a language.
    Classify {
        #[command(subcommand)]
        which: Classify,
    },
    /// Decide pp- or ep-definability of a relation.
    Define {
        #[command(subcommand)]
        mode: Define,
    },
    /// Solve a CSP instance file.
    Solve {
        instance: PathBuf,
    },
    /// Verify a shipped interpretation exhaustively.
    VerifyInterp {
        /// Interpretation name; see `--list`.
        name: Option<String>,
        #[arg(long)]
        list: bool,
    },
    /// Partition arrows for finite ordered structures.
    Ramsey {
        #[command(subcommand)]
        which: Ramsey,
    },
    /// List the built-in relations and behaviors.
    Catalog {
        /// Keep entries whose name or description contains this text.
        #[arg(long)]
        filter: Option<String>,
        #[arg(long, value_enum)]
        kind: Option<Kind>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Relations,
    Behaviors,
}

#[derive(Args, Debug, Clone)]
pub struct LangArgs {
    /// Language file (JSON).
    #[arg(long)]
    pub language: Option<PathBuf>,
    /// Comma-separated built-in relations, instead of a file.
    #[arg(long, value_delimiter = ',')]
    pub builtins: Vec<String>,
    /// Base structure; checked against the file when both are given.
    #[arg(long)]
    pub base: Option<String>,
}

#[derive(Args, Debug)]
pub struct ParseArgs {
    /// Formula text; without it the language file is normalized.
    pub formula: Option<String>,
    /// Free variables in argument order.
    #[arg(long, value_delimiter = ',')]
    pub vars: Vec<String>,
    #[arg(long, default_value = "R")]
    pub name: String,
    #[command(flatten)]
    pub lang: LangArgs,
}

#[derive(Subcommand, Debug)]
pub enum Classify {
    /// First-order class of a reduct of (Q;<).
    Cameron(LangArgs),
    /// First-order class of a reduct of the random graph.
    Thomas(LangArgs),
    /// Which catalog endomorphisms a random graph reduct has.
    Monoid(LangArgs),
    /// CSP complexity of an equality language.
    Equality(LangArgs),
    /// CSP complexity of a temporal language.
    Csp {
        #[command(flatten)]
        lang: LangArgs,
        /// Also build and check the reduction chain of an NPc verdict.
        #[arg(long)]
        chain: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum Define {
    Pp(DefineArgs),
    Ep(DefineArgs),
}

#[derive(Args, Debug)]
pub struct DefineArgs {
    /// Target relation: a language relation or a built-in of the base.
    #[arg(long, conflicts_with = "formula")]
    pub target: Option<String>,
    /// Target as a quantifier-free formula over `--vars`.
    #[arg(long)]
    pub formula: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub vars: Vec<String>,
    #[arg(long)]
    pub max_vars: Option<usize>,
    #[arg(long)]
    pub closure_steps: Option<usize>,
    #[command(flatten)]
    pub lang: LangArgs,
}

#[derive(Subcommand, Debug)]
pub enum Ramsey {
    /// S → (H)^P_k for structures given as chain:N or graph:N:a-b,...
    Arrows {
        #[arg(long = "S")]
        s: String,
        #[arg(long = "H")]
        h: String,
        #[arg(long = "P")]
        p: String,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 24)]
        max_copies: usize,
    },
    /// Product arrow for factor sizes, part sizes and block sizes.
    Product {
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        parts: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        blocks: Vec<usize>,
        #[arg(long)]
        k: usize,
    },
    /// Minimal factor sizes forcing a monochromatic block.
    Frontier {
        #[arg(long, value_delimiter = ',')]
        parts: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        blocks: Vec<usize>,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 8)]
        max_size: usize,
    },
}

/// What a subcommand produced.
#[derive(Debug, Clone)]
pub struct Report {
    pub code: u8,
    pub json: Value,
    pub human: String,
}

impl Report {
    fn definite(json: Value, human: String) -> Report {
        Report {
            code: EXIT_OK,
            json,
            human,
        }
    }

    fn render(&self, as_json: bool) -> String {
        if as_json {
            serde_json::to_string_pretty(&self.json).expect("reports are plain JSON")
        } else {
            self.human.clone()
        }
    }
}

/// Parses `argv` and runs it: the exit code and the text for standard
/// output, or for standard error when the code is [`EXIT_ERROR`].
pub fn run<I, T>(argv: I) -> (u8, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            return (code, e.render().to_string());
        }
    };
    match execute(&cli) {
        Ok(r) => (r.code, r.render(cli.json)),
        Err(e) => {
            let msg = format!("{e:#}");
            let text = if cli.json {
                json!({ "error": msg }).to_string()
            } else {
                format!("error: {msg}")
            };
            (EXIT_ERROR, text)
        }
    }
}

pub fn execute(cli: &Cli) -> Result<Report> {
    let parallel = cli.jobs > 1;
    match &cli.cmd {
        Cmd::Parse(a) => parse(a),
        Cmd::Classify { which } => classify(which, cli, parallel),
        Cmd::Define { mode } => define(mode, cli, parallel),
        Cmd::Solve { instance } => solve(instance),
        Cmd::VerifyInterp { name, list } => verify(name.as_deref(), *list),
        Cmd::Ramsey { which } => ramsey(which, cli, parallel),
        Cmd::Catalog { filter, kind } => Ok(catalog(filter.as_deref(), *kind)),
    }
}

fn load_language(a: &LangArgs) -> Result<Language> {
    let base = a
        .base
        .as_deref()
        .map(|b| b.parse::<Base>())
        .transpose()?;
    let lang = match (&a.language, a.builtins.is_empty()) {
        (Some(path), true) => read_language(path)?,
        (None, false) => {
            let base = base.ok_or_else(|| anyhow!("--builtins needs --base"))?;
            let names: Vec<&str> = a.builtins.iter().map(String::as_str).collect();
            Language::from_builtins(a.builtins.join("_"), base, &names)?
        }
        (Some(_), false) => bail!("give either --language or --builtins, not both"),
        (None, true) => bail!("a language is required (--language FILE or --builtins A,B --base B)"),
    };
    if let Some(b) = base {
        if b != lang.base {
            bail!("--base {b} does not match the language base {}", lang.base);
        }
    }
    Ok(lang)
}

fn read_language(path: &Path) -> Result<Language> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Language::from_json_str(&text).with_context(|| format!("in {}", path.display()))
}

fn parse(a: &ParseArgs) -> Result<Report> {
    let Some(text) = &a.formula else {
        let lang = load_language(&a.lang)?;
        let human = lang
            .relations
            .iter()
            .map(|r| format!("{} ({} types): {}", r.name, r.len(), render(r)))
            .collect::<Vec<_>>()
            .join("\n");
        return Ok(Report::definite(serde_json::to_value(lang.to_json())?, human));
    };
    let lang = if a.lang.language.is_none() && a.lang.builtins.is_empty() {
        let base: Base = a
            .lang
            .base
            .as_deref()
            .ok_or_else(|| anyhow!("--base or a language is required"))?
            .parse()?;
        Language::new("L", base)
    } else {
        load_language(&a.lang)?
    };
    let vars = (!a.vars.is_empty()).then_some(a.vars.as_slice());
    let f = parse_qf_in(text, &lang, vars)?;
    let r = f.normalize(a.name.clone())?;
    let human = format!("{} ({} types): {}", r.name, r.len(), render(&r));
    Ok(Report::definite(
        json!({ "relation": r.to_json(), "rendered": render(&r) }),
        human,
    ))
}

fn evidence_lines(ev: &[Evidence]) -> String {
    ev.iter()
        .map(|e| match e {
            Evidence::Closure {
                relation,
                test,
                closed,
                ..
            } => format!("  {relation} closed under {test}: {closed}"),
            Evidence::Behavior {
                behavior,
                preserves_all,
                broken,
            } => match broken {
                Some(r) => format!("  {behavior} breaks {r}"),
                None => format!("  {behavior} preserves all: {preserves_all}"),
            },
            Evidence::Derivation { hard, formula } => format!("  {hard} = {formula}"),
            Evidence::Refutation { hard, witness } => {
                format!("  {hard} refuted by {}", witness.behavior.name)
            }
            Evidence::Inferred { note } => format!("  {note}"),
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn classify(which: &Classify, cli: &Cli, parallel: bool) -> Result<Report> {
    macro_rules! simple {
        ($f:ident, $a:expr) => {{
            let lang = load_language($a)?;
            let r = $f(&lang)?;
            let verdict = match serde_json::to_value(&r.verdict)? {
                Value::String(s) => s,
                v => v.to_string(),
            };
            let human = format!("{}: {verdict}\n{}", lang.name, evidence_lines(&r.evidence));
            Ok(Report::definite(serde_json::to_value(&r)?, human))
        }};
    }
    match which {
        Classify::Cameron(a) => simple!(cameron_class, a),
        Classify::Thomas(a) => simple!(thomas_class, a),
        Classify::Monoid(a) => simple!(graph_monoid_case, a),
        Classify::Equality(a) => simple!(equality_csp, a),
        Classify::Csp { lang, chain } => {
            let lang = load_language(lang)?;
            let mut caps = DefinabilityCaps {
                parallel,
                ..DefinabilityCaps::default()
            };
            if let Some(b) = cli.budget {
                caps.behavior_budget = b;
            }
            let r = temporal_csp(&lang, caps)?;
            let verdict = match &r.verdict {
                TemporalCsp::P { evidence } => format!("P ({evidence})"),
                TemporalCsp::NpComplete { hard } => format!("NPc ({hard})"),
                TemporalCsp::Inconclusive => "Inconclusive".to_string(),
            };
            let mut human = format!("{}: {verdict}\n{}", lang.name, evidence_lines(&r.evidence));
            for c in &r.caveats {
                human += &format!("\n  caveat: {c}");
            }
            let mut j = serde_json::to_value(&r)?;
            if let (true, TemporalCsp::NpComplete { hard }) = (*chain, &r.verdict) {
                let formula = r
                    .evidence
                    .iter()
                    .find_map(|e| match e {
                        Evidence::Derivation { formula, .. } => Some(formula.clone()),
                        _ => None,
                    })
                    .ok_or_else(|| anyhow!("NPc verdict without a derivation"))?;
                let c = hardness_chain(&lang, hard, &formula)?;
                human += &format!("\n{c}");
                j["chain"] = serde_json::to_value(&c)?;
            }
            let code = if r.verdict == TemporalCsp::Inconclusive {
                EXIT_INCONCLUSIVE
            } else {
                EXIT_OK
            };
            Ok(Report {
                code,
                json: j,
                human,
            })
        }
    }
}

fn target_relation(a: &DefineArgs, lang: &Language) -> Result<Relation> {
    match (&a.target, &a.formula) {
        (Some(name), None) => lang
            .resolve(name)
            .ok_or_else(|| anyhow!("unknown relation `{name}`")),
        (None, Some(text)) => {
            let vars = (!a.vars.is_empty()).then_some(a.vars.as_slice());
            Ok(parse_qf_in(text, lang, vars)?.normalize("target")?)
        }
        _ => bail!("give --target NAME or --formula TEXT"),
    }
}

fn define(mode: &Define, cli: &Cli, parallel: bool) -> Result<Report> {
    let (a, ep) = match mode {
        Define::Pp(a) => (a, false),
        Define::Ep(a) => (a, true),
    };
    let lang = load_language(&a.lang)?;
    let target = target_relation(a, &lang)?;
    let mut caps = DefinabilityCaps {
        parallel,
        ..DefinabilityCaps::default()
    };
    if let Some(v) = a.max_vars {
        caps.max_vars = v;
    }
    if let Some(s) = a.closure_steps {
        caps.closure_steps = s;
    }
    if let Some(b) = cli.budget {
        caps.behavior_budget = b;
    }
    let v: DefinabilityVerdict = if ep {
        decide_ep(&target, &lang, caps)?
    } else {
        decide_pp(&target, &lang, caps)?
    };
    let j = v.to_json();
    let detail = match (&j.formula, &j.witness, &j.reason) {
        (Some(f), ..) => format!("{}({}) = {f}", target.name, default_vars(target.arity()).join(",")),
        (None, Some(w), _) => format!("witness {} breaks {}", w.behavior.name, w.relation),
        (None, None, Some(r)) => r.clone(),
        _ => String::new(),
    };
    let human = format!("{}\n  {detail}", v.label());
    let code = if matches!(v.label(), "Inconclusive") {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    };
    Ok(Report {
        code,
        json: serde_json::to_value(&j)?,
        human,
    })
}

fn solve(path: &Path) -> Result<Report> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let j: CspInstanceJson =
        serde_json::from_str(&text).with_context(|| format!("in {}", path.display()))?;
    let dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let load = move |r: &str| -> reducts::Result<Language> {
        let text = std::fs::read_to_string(dir.join(r))
            .map_err(|e| reducts::Error::InvalidArgument(format!("{r}: {e}")))?;
        Language::from_json_str(&text)
    };
    let inst = CspInstance::from_json(&j, &load)?;
    Ok(match solve_csp(&inst)? {
        CspResult::Sat(w) => {
            let values = w
                .assignment
                .iter()
                .map(|(v, x)| format!("{v}={x}"))
                .collect::<Vec<_>>()
                .join(" ");
            Report::definite(
                json!({ "satisfiable": true, "witness": *w }),
                format!("satisfiable\n  {values}"),
            )
        }
        CspResult::Unsat => Report::definite(
            json!({ "satisfiable": false }),
            "unsatisfiable".to_string(),
        ),
    })
}

fn verify(name: Option<&str>, list: bool) -> Result<Report> {
    if list {
        let names = interpretation_names();
        return Ok(Report::definite(json!(names), names.join("\n")));
    }
    let name = name.ok_or_else(|| anyhow!("name an interpretation, or pass --list"))?;
    let i = interpretation(name)?;
    let r = verify_interpretation(&i)?;
    let mut human = format!(
        "{}: {} (dimension {})",
        r.name,
        if r.verified() { "verified" } else { "FAILS" },
        r.dim
    );
    for (f, n) in &r.checked {
        human += &format!("\n  {f}: {n} types");
    }
    if !r.verified() {
        human += &format!(
            "\n  {} failing types, {} with disjoint blocks",
            r.failures, r.generic_failures
        );
    }
    for n in &r.notes {
        human += &format!("\n  note: {n}");
    }
    let mut j = serde_json::to_value(&r)?;
    j["verified"] = json!(r.verified());
    Ok(Report::definite(j, human))
}

fn arrow_human(r: &ArrowReport) -> String {
    let mut s = format!(
        "{} ({} objects, {} copies of H, {} nodes)",
        r.holds, r.objects, r.copies_of_h, r.nodes
    );
    if let Some(c) = &r.bad_coloring {
        s += "\n  coloring with no monochromatic copy:";
        for (o, col) in c.objects.iter().zip(&c.colors) {
            s += &format!("\n    {o:?} -> {col}");
        }
    }
    s
}

fn ramsey(which: &Ramsey, cli: &Cli, parallel: bool) -> Result<Report> {
    let mut caps = ArrowCaps {
        parallel,
        ..ArrowCaps::default()
    };
    if let Some(b) = cli.budget {
        caps.max_nodes = b;
    }
    match which {
        Ramsey::Arrows {
            s,
            h,
            p,
            k,
            max_copies,
        } => {
            caps.max_copies = *max_copies;
            let q = ArrowQuery {
                s: parse_structure(s)?,
                h: parse_structure(h)?,
                p: parse_structure(p)?,
                k: *k,
            };
            let r = arrows(&q, &caps)?;
            Ok(Report::definite(serde_json::to_value(&r)?, arrow_human(&r)))
        }
        Ramsey::Product {
            sizes,
            parts,
            blocks,
            k,
        } => {
            let q = ProductQuery {
                sizes: sizes.clone(),
                parts: parts.clone(),
                blocks: blocks.clone(),
                k: *k,
            };
            let r = product_arrows(&q, &caps)?;
            Ok(Report::definite(serde_json::to_value(&r)?, arrow_human(&r)))
        }
        Ramsey::Frontier {
            parts,
            blocks,
            k,
            max_size,
        } => {
            let f = minimal_product_sizes(parts, blocks, *k, *max_size, &caps)?;
            let human = if f.is_empty() {
                format!("none up to size {max_size}")
            } else {
                f.iter()
                    .map(|s| format!("{s:?}"))
                    .collect::<Vec<_>>()
                    .join("\n")
            };
            Ok(Report::definite(json!({ "minimal_sizes": f }), human))
        }
    }
}

fn catalog(filter: Option<&str>, kind: Option<Kind>) -> Report {
    let keep = |name: &str, desc: &str| {
        filter.is_none_or(|f| name.contains(f) || desc.contains(f))
    };
    let bases = |bs: &[Base]| bs.iter().map(|b| b.to_string()).collect::<Vec<_>>();
    let mut rels = Vec::new();
    let mut behs = Vec::new();
    let mut human = Vec::new();
    if kind != Some(Kind::Behaviors) {
        human.push("relations:".to_string());
        for b in BUILTINS.iter().filter(|b| keep(b.name, b.description)) {
            rels.push(json!({
                "name": b.name,
                "arity": b.arity(),
                "bases": bases(b.bases),
                "vars": b.vars,
                "description": b.description,
            }));
            human.push(format!(
                "  {:<10} {}  {}",
                b.name,
                b.vars.join(","),
                b.description
            ));
        }
    }
    if kind != Some(Kind::Relations) {
        human.push("behaviors:".to_string());
        for c in CATALOG.iter().filter(|c| keep(c.name, c.description)) {
            behs.push(json!({
                "name": c.name,
                "arity": c.arity,
                "constants": c.constants,
                "bases": bases(c.bases),
                "description": c.description,
            }));
            human.push(format!(
                "  {:<28} arity {}  {}",
                c.name, c.arity, c.description
            ));
        }
    }
    Report::definite(
        json!({ "relations": rels, "behaviors": behs }),
        human.join("\n"),
    )
}
