//! Batch front end: build objects from JSON or flags, run checks, emit
//! machine-readable reports. Exit status: 0 on success, 1 when a check
//! fails, 2 on malformed input.

use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::json;

use plectic_core::fq::FqCtx;
use plectic_core::hahn::{completion_classify, ExponentFamily, HahnCtx, QExp};
use plectic_core::lubin_tate::{lt_add_law, lt_check_axioms, lt_inverse, lt_scalar, LubinTatePoly};
use plectic_core::monoid::{
    coind_finite_field, glectic_act, minimal_cosets, minimal_relations, plectic_act,
    sd_normal_form, GlecticElement, MPartElem, NPartKind, NSubmonoid, PlecticElement,
    QuotientData, SemidirectPresentation, WordLetter,
};
use plectic_core::multivar::{act_gamma, act_phi, MultivarJson, MultivarLaurent, RingSpecDelta};
use plectic_core::padic::{PadicElement, PadicRingSpec};
use plectic_core::phigamma::{build_sd, fixed_points, ResidueModule, ResidueRing, SearchBox};
use plectic_core::residue::LaurentPoly;
use plectic_core::series::SeriesJson;
use plectic_core::CoreError;

#[derive(Parser)]
#[command(name = "plectic", version, about = "Lubin-Tate multivariable ring toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, global = true, default_value = "json")]
    format: Format,
    /// Seed for randomized suites.
    #[arg(long, global = true, default_value_t = 193)]
    seed: u64,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct InputArg {
    /// Path to a JSON file, or inline JSON.
    #[arg(long)]
    input: String,
}

#[derive(Subcommand)]
enum Command {
    /// Build the addition law (and optionally a scalar series) of a
    /// Lubin-Tate polynomial.
    LtBuild {
        #[arg(long)]
        p: u64,
        /// Residue degree of the unramified layer.
        #[arg(long, default_value_t = 1)]
        f_res: usize,
        /// "standard" (T^q + pi T) or "cyclotomic" ((1+T)^p - 1).
        #[arg(long, default_value = "standard")]
        poly: String,
        #[arg(long, default_value_t = 8)]
        cap: u32,
        #[arg(long, default_value_t = 4)]
        prec: u32,
        /// Also emit the endomorphism series `[a](T)` for this integer scalar.
        #[arg(long)]
        scalar: Option<i64>,
        /// Also emit the formal inverse series.
        #[arg(long, default_value_t = false)]
        inverse: bool,
    },
    /// Run the formal module axiom suite on random scalar samples.
    LtCheck {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        f_res: usize,
        #[arg(long, default_value = "standard")]
        poly: String,
        #[arg(long, default_value_t = 6)]
        cap: u32,
        #[arg(long, default_value_t = 3)]
        prec: u32,
        #[arg(long, default_value_t = 4)]
        samples: usize,
    },
    /// Apply a word of phi / gamma / plectic / glectic operations to a ring
    /// element.
    RingAct(InputArg),
    /// Weak-topology membership of a ring element.
    RingMember(InputArg),
    /// Structure report of a residue-level module.
    ModValidate(InputArg),
    /// Finite etale algebra presentation of the fixed-point functor.
    ModSd(InputArg),
    /// Box-bounded Frobenius fixed points.
    ModFixed(InputArg),
    /// Maximal left-coset representatives of the canonical Frobenius
    /// submonoid.
    MonoidCosets {
        #[arg(long)]
        f: u64,
        #[arg(long)]
        delta: usize,
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Dickson-minimal relations between two coset representatives.
    MonoidRelations {
        #[arg(long)]
        f: u64,
        #[arg(long, value_delimiter = ',')]
        t1: Vec<u64>,
        #[arg(long, value_delimiter = ',')]
        t2: Vec<u64>,
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Coinduction decomposition of a finite-field tensor product.
    CoindCheck {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        q_prime: u64,
        #[arg(long)]
        r: u64,
        #[arg(long)]
        delta: usize,
    },
    /// Normal form of a word in a semidirect-product presentation.
    SdNormalForm(InputArg),
    /// Weighted norm and ideal membership of a generalized power series.
    HahnNorm(InputArg),
    /// Two-completions classification of a described exponent family.
    HahnClassify(InputArg),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome { report, check_failed }) => {
            match cli.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
                Format::Text => println!("{}", text_render(&report)),
            }
            if check_failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("input error: {e}");
            ExitCode::from(2)
        }
    }
}

struct Outcome {
    report: serde_json::Value,
    check_failed: bool,
}

fn ok(report: serde_json::Value) -> Result<Outcome, Error> {
    Ok(Outcome { report, check_failed: false })
}

fn checked(report: serde_json::Value, pass: bool) -> Result<Outcome, Error> {
    Ok(Outcome { report, check_failed: !pass })
}

#[derive(Debug)]
struct Error(String);

impl std::fmt::Display for Error {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<CoreError> for Error {
    fn from(e: CoreError) -> Self {
        Error(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error(format!("JSON parse failure at line {}, column {}: {e}", e.line(), e.column()))
    }
}

fn text_render(v: &serde_json::Value) -> String {
    let mut out = String::new();
    match v {
        serde_json::Value::Object(map) => {
            for (k, val) in map {
                out.push_str(&format!("{k}: {val}\n"));
            }
        }
        other => out.push_str(&other.to_string()),
    }
    out
}

fn read_input<T: serde::de::DeserializeOwned>(arg: &InputArg) -> Result<T, Error> {
    let raw = if arg.input.trim_start().starts_with(['{', '[']) {
        arg.input.clone()
    } else {
        std::fs::read_to_string(&arg.input)
            .map_err(|e| Error(format!("cannot read {}: {e}", arg.input)))?
    };
    Ok(serde_json::from_str(&raw)?)
}

fn base_spec(p: u64, f_res: usize, needed_prec: u32) -> Result<Arc<PadicRingSpec>, Error> {
    // Keep the working modulus within u64 for serialization.
    let max_w = (62.0 / (p as f64).log2()).floor() as u32;
    let prec = needed_prec.min(max_w);
    Ok(PadicRingSpec::unramified(p, f_res, prec)?)
}

fn lt_poly(spec: &Arc<PadicRingSpec>, kind: &str, prec: u32) -> Result<LubinTatePoly, Error> {
    match kind {
        "standard" => Ok(LubinTatePoly::standard(spec, prec)?),
        "cyclotomic" => Ok(LubinTatePoly::cyclotomic(spec, prec)?),
        other => Err(Error(format!("unknown polynomial choice '{other}' (field: poly)"))),
    }
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    match &cli.command {
        Command::LtBuild { p, f_res, poly, cap, prec, scalar, inverse } => {
            let spec = base_spec(*p, *f_res, prec + cap + 2)?;
            let work = spec.precision();
            let f = lt_poly(&spec, poly, work)?;
            let law = lt_add_law(&f, *cap, *prec)?;
            let mut report = json!({
                "p": p,
                "f_res": f_res,
                "poly": poly,
                "add_law": SeriesJson::encode(&law),
            });
            if let Some(a) = scalar {
                let a_el = spec.from_i64(*a, work);
                let g = lt_scalar(&f, &a_el, *cap, *prec)?;
                report["scalar"] = json!({ "a": a, "series": SeriesJson::encode(&g) });
            }
            if *inverse {
                let inv = lt_inverse(&f, *cap, *prec)?;
                report["inverse"] = json!(SeriesJson::encode(&inv));
            }
            ok(report)
        }
        Command::LtCheck { p, f_res, poly, cap, prec, samples } => {
            let spec = base_spec(*p, *f_res, prec + cap + 2)?;
            let work = spec.precision();
            let f = lt_poly(&spec, poly, work)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let dim = spec.dim();
            let mut pairs = Vec::new();
            for _ in 0..*samples {
                let a = random_element(&spec, &mut rng, dim, work);
                let b = random_element(&spec, &mut rng, dim, work);
                pairs.push((a, b));
            }
            let report = lt_check_axioms(&f, *cap, *prec, &pairs)?;
            let pass = report.all_pass();
            checked(json!({ "seed": cli.seed, "report": report, "pass": pass }), pass)
        }
        Command::RingAct(arg) => {
            let input: RingActInput = read_input(arg)?;
            let (spec, x) = input.ring.build(&input.element)?;
            let mut cur = x;
            for step in &input.word {
                cur = apply_step(&spec, &cur, step)?;
            }
            ok(json!(MultivarJson::encode(&cur)))
        }
        Command::RingMember(arg) => {
            let input: RingMemberInput = read_input(arg)?;
            let (_, x) = input.ring.build(&input.element)?;
            let member = x.weak_membership(input.n, input.k);
            ok(json!({ "n": input.n, "k": input.k, "member": member }))
        }
        Command::ModValidate(arg) => {
            let input: ModuleInput = read_input(arg)?;
            let module = input.build()?;
            let report = module.validate();
            let pass = report.all_etale() && report.all_compatible();
            checked(json!({ "report": report, "pass": pass }), pass)
        }
        Command::ModSd(arg) => {
            let input: ModuleInput = read_input(arg)?;
            let module = input.build()?;
            let sd = build_sd(&module)?;
            let relations: Vec<serde_json::Value> = sd
                .relations
                .iter()
                .enumerate()
                .map(|(j, rel)| {
                    json!([
                        j,
                        rel.iter().map(|(i, c)| json!([i, poly_json(c)])).collect::<Vec<_>>()
                    ])
                })
                .collect();
            ok(json!({ "rank": sd.rank, "r": sd.r, "relations": relations }))
        }
        Command::ModFixed(arg) => {
            let input: ModFixedInput = read_input(arg)?;
            let module = input.module.build()?;
            let fx = fixed_points(&module, SearchBox { lo: input.box_lo, hi: input.box_hi })?;
            let basis: Vec<Vec<serde_json::Value>> =
                fx.basis.iter().map(|v| v.iter().map(poly_json).collect()).collect();
            ok(json!({
                "box": [input.box_lo, input.box_hi],
                "scalar_field": format!("F_{}", module.ring.ctx.p().pow(fx.scalar_field_log_p)),
                "dimension": fx.basis.len(),
                "basis": basis,
                "complete_within_box_only": true,
            }))
        }
        Command::MonoidCosets { f, delta, bound } => {
            let s = NSubmonoid::canonical(*f, *delta);
            let report = minimal_cosets(&s, *bound)?;
            ok(json!({
                "f": f,
                "delta": delta,
                "count": report.representatives.len(),
                "representatives": report.representatives,
                "certified": report.certified,
            }))
        }
        Command::MonoidRelations { f, t1, t2, bound } => {
            let s = NSubmonoid::canonical(*f, t1.len());
            let report = minimal_relations(&s, *f, t1, t2, *bound)?;
            ok(json!({
                "f": f,
                "t1": t1,
                "t2": t2,
                "minimal": report.minimal,
                "certified": report.certified,
            }))
        }
        Command::CoindCheck { q, q_prime, r, delta } => {
            let report = coind_finite_field(*q, *q_prime, *r, *delta)?;
            let pass = report.all_pass();
            checked(
                json!({
                    "tensor_dim_fp": report.tensor_dim_fp,
                    "factors": report.reps.len(),
                    "representatives": report.reps,
                    "bijective": report.bijective,
                    "ring_hom": report.ring_hom,
                    "equivariant": report.equivariant,
                    "pass": pass,
                }),
                pass,
            )
        }
        Command::SdNormalForm(arg) => {
            let input: SdInput = read_input(arg)?;
            input.run()
        }
        Command::HahnNorm(arg) => {
            let input: HahnInput = read_input(arg)?;
            input.run()
        }
        Command::HahnClassify(arg) => {
            let family: ExponentFamily = read_input(arg)?;
            let class = completion_classify(&family)?;
            ok(json!({
                "in_x_underline_adic": class.in_x_underline_adic,
                "in_x_delta_adic": class.in_x_delta_adic,
            }))
        }
    }
}

fn random_element(
    spec: &Arc<PadicRingSpec>,
    rng: &mut ChaCha8Rng,
    dim: usize,
    prec: u32,
) -> PadicElement {
    let coords: Vec<u64> = (0..dim).map(|_| rng.gen_range(0..1 << 16)).collect();
    spec.from_coords(&coords, prec).expect("dimension matches")
}

fn poly_json(x: &LaurentPoly) -> serde_json::Value {
    let terms: Vec<serde_json::Value> = x.terms().map(|(e, c)| json!([e, c.coords()])).collect();
    json!(terms)
}

// ---------------------------------------------------------------------------
// Input schemas
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct RingDescriptor {
    p: u64,
    #[serde(default = "one_usize")]
    f_res: usize,
    delta: Vec<String>,
    neg_bound: u32,
    window: u32,
    prec: u32,
    #[serde(default = "standard_poly")]
    lt: String,
}

fn one_usize() -> usize {
    1
}

fn standard_poly() -> String {
    "standard".into()
}

impl RingDescriptor {
    fn build(
        &self,
        element: &Vec<(Vec<i64>, Vec<u64>)>,
    ) -> Result<(Arc<RingSpecDelta>, MultivarLaurent), Error> {
        let base = base_spec(self.p, self.f_res, self.prec + self.window + 4)?;
        let f = lt_poly(&base, &self.lt, base.precision())?;
        let spec = RingSpecDelta::uniform(
            &base,
            self.delta.clone(),
            f,
            self.neg_bound,
            self.window,
            self.prec,
        )?;
        let terms = element
            .iter()
            .map(|(e, coords)| Ok((e.clone(), base.from_coords(coords, self.prec)?)))
            .collect::<Result<Vec<_>, CoreError>>()?;
        let x = spec.from_terms(terms)?;
        Ok((spec, x))
    }
}

#[derive(Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
enum ActStep {
    Phi { steps: Vec<u32> },
    Gamma { units: Vec<Vec<u64>> },
    Plectic { phi: Vec<u64>, units: Vec<Vec<u64>>, perm: Vec<usize> },
    Glectic { perm: Vec<usize>, d: Vec<u32> },
    /// Powers of the unramified arithmetic Frobenius.
    Frob { power: u32 },
}

#[derive(Deserialize)]
struct RingActInput {
    ring: RingDescriptor,
    element: Vec<(Vec<i64>, Vec<u64>)>,
    word: Vec<ActStep>,
}

fn apply_step(
    spec: &Arc<RingSpecDelta>,
    x: &MultivarLaurent,
    step: &ActStep,
) -> Result<MultivarLaurent, Error> {
    let base = spec.base();
    let decode_units = |units: &Vec<Vec<u64>>| -> Result<Vec<PadicElement>, Error> {
        units
            .iter()
            .map(|coords| Ok(base.from_coords(coords, base.precision())?))
            .collect()
    };
    let out = match step {
        ActStep::Phi { steps } => act_phi(x, steps)?,
        ActStep::Gamma { units } => act_gamma(x, &decode_units(units)?)?,
        ActStep::Plectic { phi, units, perm } => {
            let g = PlecticElement {
                phi: phi.clone(),
                units: decode_units(units)?,
                perm: perm.clone(),
            };
            plectic_act(&g, x)?
        }
        ActStep::Glectic { perm, d } => {
            let g = GlecticElement { perm: perm.clone(), d: d.clone() };
            if g.unramified_power(perm.len()).is_none() {
                // general degree tables are accepted only when consistent
                // with the cocycle rule; at desk scale that means a power of
                // the unramified Frobenius
                return Err(Error(
                    "glectic descriptor is not a power of the unramified Frobenius (field: word.d)"
                        .into(),
                ));
            }
            glectic_act(&g, x)?
        }
        ActStep::Frob { power } => {
            let g = GlecticElement::unramified_frobenius(spec.nvars()).pow(*power)?;
            glectic_act(&g, x)?
        }
    };
    Ok(out)
}

#[derive(Deserialize)]
struct RingMemberInput {
    ring: RingDescriptor,
    element: Vec<(Vec<i64>, Vec<u64>)>,
    n: u32,
    k: u32,
}

#[derive(Deserialize)]
struct ModuleInput {
    /// Characteristic of the residue field.
    p: u64,
    /// Residue degree (the field is `F_{p^f}`).
    #[serde(default = "one_usize")]
    f: usize,
    nvars: usize,
    #[serde(default = "default_trunc")]
    trunc: i64,
    rank: usize,
    /// Per-variable matrices keyed by the variable index as a string.
    #[serde(default)]
    phi_mats: std::collections::BTreeMap<String, MatrixJson>,
    /// `(log_p r, matrix)` for the global layer.
    phi_global: Option<(u32, MatrixJson)>,
}

type MatrixJson = Vec<Vec<Vec<(Vec<i64>, Vec<u64>)>>>;

fn default_trunc() -> i64 {
    16
}

impl ModuleInput {
    fn build(&self) -> Result<ResidueModule, Error> {
        let ctx = FqCtx::new(self.p, self.f)?;
        let ring = ResidueRing::new(&ctx, self.nvars, self.trunc);
        let decode_matrix = |m: &MatrixJson| -> Result<Vec<Vec<LaurentPoly>>, Error> {
            m.iter()
                .map(|row| {
                    row.iter()
                        .map(|entry| {
                            let mut poly = LaurentPoly::zero(&ctx, self.nvars);
                            for (e, coords) in entry {
                                if e.len() != self.nvars {
                                    return Err(Error(
                                        "exponent arity mismatch (field: matrices)".into(),
                                    ));
                                }
                                let c = ctx.from_coords(coords)?;
                                let merged = poly.coeff(e).add(&c);
                                poly.insert_term(e.clone(), merged);
                            }
                            Ok(poly)
                        })
                        .collect()
                })
                .collect()
        };
        let mut phi_mats = std::collections::BTreeMap::new();
        for (k, m) in &self.phi_mats {
            let idx: usize = k
                .parse()
                .map_err(|_| Error(format!("bad variable index '{k}' (field: phi_mats)")))?;
            phi_mats.insert(idx, decode_matrix(m)?);
        }
        let phi_global = match &self.phi_global {
            Some((t, m)) => Some((*t, decode_matrix(m)?)),
            None => None,
        };
        Ok(ResidueModule { ring, rank: self.rank, phi_mats, phi_global })
    }
}

#[derive(Deserialize)]
struct ModFixedInput {
    #[serde(flatten)]
    module: ModuleInput,
    box_lo: i64,
    box_hi: i64,
}

#[derive(Deserialize)]
struct SdInput {
    nvars: usize,
    /// The twisting permutation of the monogenic part, or "sym" for the
    /// symmetric-group part.
    sigma: serde_json::Value,
    /// Optional identification data: `[power, kappa_phi]`.
    quotient: Option<(u64, Vec<u64>)>,
    /// Word letters: {"m": phi-exponents} | {"n": power} | {"perm": [..]}.
    word: Vec<serde_json::Value>,
}

impl SdInput {
    fn run(&self) -> Result<Outcome, Error> {
        let one = PadicRingSpec::qp(2, 4)?.one(4);
        let n_part = if self.sigma == json!("sym") {
            NPartKind::SymmetricGroup
        } else {
            let sigma: Vec<usize> = serde_json::from_value(self.sigma.clone())?;
            NPartKind::FreeMonogenic { sigma }
        };
        let quotient = self.quotient.as_ref().map(|(power, kappa_phi)| QuotientData {
            power: *power,
            kappa: MPartElem { phi: kappa_phi.clone(), units: vec![one.clone(); self.nvars] },
        });
        let pres = SemidirectPresentation { nvars: self.nvars, n_part, quotient };
        let mut word = Vec::new();
        for letter in &self.word {
            if let Some(phi) = letter.get("m") {
                let phi: Vec<u64> = serde_json::from_value(phi.clone())?;
                word.push(WordLetter::M(MPartElem {
                    phi,
                    units: vec![one.clone(); self.nvars],
                }));
            } else if let Some(n) = letter.get("n") {
                word.push(WordLetter::NPower(serde_json::from_value(n.clone())?));
            } else if let Some(perm) = letter.get("perm") {
                word.push(WordLetter::NPerm(serde_json::from_value(perm.clone())?));
            } else {
                return Err(Error("word letters need one of: m, n, perm (field: word)".into()));
            }
        }
        let nf = sd_normal_form(&pres, &word, &one)?;
        ok(json!({
            "phi": nf.m.phi,
            "n_power": nf.n_power,
            "n_perm": nf.n_perm,
        }))
    }
}

#[derive(Deserialize)]
struct HahnInput {
    q: u64,
    delta: usize,
    /// Terms: exponents as `[num, q_power_denominator]` pairs, coefficient 1.
    terms: Vec<Vec<(u64, u32)>>,
    weights: Vec<u64>,
    /// Optional ideal threshold `gamma = [num, q_power_denominator]`.
    gamma: Option<(u64, u32)>,
}

impl HahnInput {
    fn run(&self) -> Result<Outcome, Error> {
        let p = smallest_prime(self.q);
        let flog = (self.q as f64).log(p as f64).round() as usize;
        let fq = FqCtx::new(p, flog)?;
        let tensor = plectic_core::fq::TensorFqCtx::new(fq.clone(), fq, self.delta)?;
        let ctx = HahnCtx::new(self.q, tensor);
        let mut x = ctx.zero();
        for exps in &self.terms {
            if exps.len() != self.delta {
                return Err(Error("exponent arity mismatch (field: terms)".into()));
            }
            if exps.iter().any(|&(_, d)| d > 16) {
                return Err(Error("q-power denominators above 16 are not supported (field: terms)".into()));
            }
            let e: Vec<QExp> = exps.iter().map(|&(n, d)| QExp::new(self.q, n, d)).collect();
            x = x.add(&ctx.monomial(e, ctx.coeff.one()));
        }
        if self.weights.len() != self.delta || self.weights.iter().any(|&w| w == 0) {
            return Err(Error(
                "weights must list one integer >= 1 per variable (field: weights)".into(),
            ));
        }
        let val = x.weighted_valuation(&self.weights);
        let norm = x.norm(&self.weights);
        let mut report = json!({
            "weights": self.weights,
            "norm": norm,
            "weighted_valuation": val.map(|(n, d)| json!([n.to_string(), d])),
        });
        if let Some((gn, gd)) = self.gamma {
            report["ideal_member"] = json!(x.ideal_member(gn as u128, gd, &self.weights));
        }
        ok(report)
    }
}

fn smallest_prime(n: u64) -> u64 {
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return d;
        }
        d += 1;
    }
    n
}
