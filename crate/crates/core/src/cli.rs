//! Batch command-line front end.
//!
//! Every run writes its outputs into one directory (`--out`, else the
//! `MAXDIR_OUT` environment variable, else `maxdir_out`) together with
//! `manifest.json`: the parsed configuration, its SHA-256, the crate version,
//! wall time and a content hash per output file. Exit codes: 0 success, 1
//! usage error, 2 data error; errors go to standard error prefixed `E:`.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::bmo::{haar_delta12, ProductCoefficients, Raster};
use crate::directions::{
    extract_lacunary_subsequence, gen_cantor, gen_lacunary, gen_random, gen_uniform, longest_lacunary_estimate,
    vargas_constant_estimate, Direction, DirectionSet, DEFAULT_NODE_RESOLUTION,
};
use crate::error::Error;
use crate::grid::GridField;
use crate::norms::{extremizer_ball, growth_scan, FamilyKind, OpKind, ScanConfig};
use crate::operators::{
    cone_project, directional_multiplier, lacunary_square_function, lp_piece, lp_square_function,
    maximal_avg_directional, maximal_directional_selected, smooth_cone_project, smooth_cover_project, ConeArc,
    MultiplierSpec,
};
use crate::phase::{
    build_tile_set, greedy_size_decompose, model_sum_from_coeffs, read_coefficients_csv, saturate_conical,
    square_ops_from_coeffs, write_coefficients_csv, GreedyOptions, PacketBank, SizeMode, TileSet,
};

pub const OUT_ENV: &str = "MAXDIR_OUT";
const DEFAULT_OUT: &str = "maxdir_out";

#[derive(Parser, Debug)]
#[command(name = "maxdir", version, about = "Maximal directional operators on periodic grids")]
struct Cli {
    /// Output directory; overrides MAXDIR_OUT.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: available cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON object whose entries are appended as `--key value` flags.
    #[arg(long, global = true)]
    params: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Cmd {
    /// Direction sets.
    #[command(subcommand)]
    Dirs(DirsCmd),
    /// Grid fields.
    #[command(subcommand)]
    Field(FieldCmd),
    /// Directional operators.
    #[command(subcommand)]
    Op(OpCmd),
    /// Product BMO coefficient families.
    #[command(subcommand)]
    Bmo(BmoCmd),
    /// Tiles, wave packets and tree decompositions.
    #[command(subcommand)]
    Tiles(TilesCmd),
    /// Operator-norm scans.
    #[command(subcommand)]
    Scan(ScanCmd),
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum DirsCmd {
    /// Generate a direction set; writes directions.json.
    Gen(DirsGen),
    /// Lacunary structure of a set; writes analysis.json.
    Analyze(DirsAnalyze),
}

#[derive(Args, Debug, Serialize)]
struct DirsGen {
    /// uniform | lacunary | cantor | random
    #[arg(long)]
    family: String,
    /// Number of directions; for cantor, the number of digits (2^n angles).
    #[arg(long)]
    n: u32,
    /// Cantor base.
    #[arg(long, default_value_t = 3)]
    q: u32,
    /// Lacunary ratio.
    #[arg(long, default_value = "1/2")]
    ratio: String,
    /// Lacunary node.
    #[arg(long, default_value = "0")]
    node: String,
    /// Seed for the random family.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct DirsAnalyze {
    /// Direction set JSON.
    #[arg(long)]
    dirs: PathBuf,
    /// Resolution of the uniform node-candidate grid.
    #[arg(long, default_value_t = DEFAULT_NODE_RESOLUTION)]
    resolution: u32,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum FieldCmd {
    /// Generate a field; writes field.dsf1.
    Gen(FieldGen),
    /// Summary statistics; writes info.json.
    Info(FieldIn),
}

#[derive(Args, Debug, Serialize)]
struct FieldGen {
    /// random | ball | mode
    #[arg(long)]
    kind: String,
    #[arg(long, default_value_t = 256)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    side: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Ball radius (default side/32).
    #[arg(long)]
    radius: Option<f64>,
    /// Mode frequency `k1,k2`.
    #[arg(long, default_value = "1,0")]
    k: String,
    /// Real-valued random field.
    #[arg(long)]
    real: bool,
}

#[derive(Args, Debug, Serialize)]
struct FieldIn {
    /// DSF1 input.
    #[arg(long)]
    field: PathBuf,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum OpCmd {
    /// `T_v f` for one direction; writes apply.dsf1.
    Apply(OpApply),
    /// Pointwise supremum over a set; writes maximal.dsf1 and argmax.csv.
    Maximal(OpMaximal),
    /// Cone projection; writes cone.dsf1.
    Cone(OpCone),
    /// Littlewood–Paley piece or square function; writes lp.dsf1.
    Lp(OpLp),
    /// `(Σ_k |T_V S_k f|²)^{1/2}`; writes sq.dsf1.
    Sq(OpSq),
}

#[derive(Args, Debug, Serialize)]
struct OpApply {
    #[arg(long)]
    field: PathBuf,
    /// Angle in turns, e.g. `1/8`.
    #[arg(long)]
    direction: String,
    /// sign | bump:<k>
    #[arg(long, default_value = "sign")]
    m: String,
    /// Write `|T_v f|` instead of `T_v f`.
    #[arg(long)]
    modulus: bool,
}

#[derive(Args, Debug, Serialize)]
struct OpMaximal {
    #[arg(long)]
    field: PathBuf,
    #[arg(long)]
    dirs: PathBuf,
    /// sign | bump:<k> | average
    #[arg(long, default_value = "sign")]
    m: String,
    /// Write the supremum `|·|` instead of the selected complex value.
    #[arg(long)]
    modulus: bool,
}

#[derive(Args, Debug, Serialize)]
struct OpCone {
    #[arg(long)]
    field: PathBuf,
    /// Arc start in turns.
    #[arg(long)]
    start: String,
    /// Arc length in turns.
    #[arg(long)]
    len: String,
    /// rough | smooth | cover
    #[arg(long, default_value = "rough")]
    kind: String,
}

#[derive(Args, Debug, Serialize)]
struct OpLp {
    #[arg(long)]
    field: PathBuf,
    /// Scale `k` of `S_k`; omitted gives the square function.
    #[arg(long, allow_hyphen_values = true)]
    k: Option<i32>,
}

#[derive(Args, Debug, Serialize)]
struct OpSq {
    #[arg(long)]
    field: PathBuf,
    #[arg(long)]
    dirs: PathBuf,
    #[arg(long, default_value = "sign")]
    m: String,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum BmoCmd {
    /// Product size; writes size.json.
    Size(BmoSource),
    /// Level-set profile of `B`; writes jn.json.
    JnProfile(BmoJn),
    /// Haar square function of a field; writes delta12.dsf1.
    Delta12(FieldIn),
}

#[derive(Args, Debug, Serialize)]
struct BmoSource {
    /// Coefficient family JSON; without it a random family is drawn and
    /// written to coeffs.json.
    #[arg(long)]
    coeffs: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 3)]
    depth: i32,
}

#[derive(Args, Debug, Serialize)]
struct BmoJn {
    #[command(flatten)]
    source: BmoSource,
    /// Raster cells per side on `[0, 2^log2-side)²`.
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    log2_side: i32,
    #[arg(long, default_value_t = 32)]
    levels: usize,
    /// Rescale the family to size one first.
    #[arg(long)]
    normalize: bool,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum TilesCmd {
    /// Build a tile set; writes tiles.json.
    Build(TilesBuild),
    /// Packet coefficients of a field; writes coeffs.csv and skipped.json.
    Coeffs(TilesCoeffs),
    /// Greedy size decomposition; writes forest.json.
    Decompose(TilesDecompose),
    /// Saturate a conical tree; writes saturation.json.
    Saturate(TilesSaturate),
    /// Model sum and square operators; writes modelsum.dsf1, sq.dsf1, sc.dsf1.
    Modelsum(TilesModelsum),
}

#[derive(Args, Debug, Serialize)]
struct TilesBuild {
    /// Annulus exponents `a`, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    anns: String,
    /// Arc scales `m`, comma separated.
    #[arg(long)]
    arcs: String,
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 4.0)]
    side: f64,
}

#[derive(Args, Debug, Serialize)]
struct TilesCoeffs {
    #[arg(long)]
    tiles: PathBuf,
    #[arg(long)]
    field: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct TilesDecompose {
    #[arg(long)]
    tiles: PathBuf,
    #[arg(long)]
    coeffs: PathBuf,
    /// lacunary | conical
    #[arg(long, default_value = "lacunary")]
    mode: String,
    #[arg(long)]
    saturate: bool,
    /// Tile ids to decompose (default: all).
    #[arg(long)]
    subset: Option<String>,
    #[arg(long, default_value_t = 12)]
    exact_limit: usize,
}

#[derive(Args, Debug, Serialize)]
struct TilesSaturate {
    #[arg(long)]
    tiles: PathBuf,
    /// Tile ids of the conical tree.
    #[arg(long)]
    tree: String,
    /// Candidate tile ids (default: all).
    #[arg(long)]
    ambient: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct TilesModelsum {
    #[arg(long)]
    tiles: PathBuf,
    #[arg(long)]
    coeffs: PathBuf,
    #[arg(long)]
    dirs: PathBuf,
    #[arg(long)]
    subset: Option<String>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ScanCmd {
    /// Growth of norm certificates with N; writes scan.csv and scan.json.
    Norms(ScanNorms),
}

#[derive(Args, Debug, Serialize)]
struct ScanNorms {
    /// uniform | lacunary | cantor
    #[arg(long)]
    family: String,
    /// Exponent, decimal or fraction.
    #[arg(long, default_value = "2")]
    p: String,
    /// hilbert | maximal | lacunary_square | bump:<k>
    #[arg(long, default_value = "hilbert")]
    op: String,
    /// Strictly increasing list of N.
    #[arg(long = "N", value_delimiter = ',', required = true)]
    counts: Vec<usize>,
    /// Grid size.
    #[arg(long, default_value_t = 256)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    side: f64,
    /// Ball radius (default side/32).
    #[arg(long)]
    radius: Option<f64>,
    /// Ball witness only, no alternating maximization.
    #[arg(long)]
    no_alt: bool,
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
enum Fail {
    Usage(String),
    Data(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) => Fail::Usage(e.to_string()),
            _ => Fail::Data(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Fail {
    fn from(e: std::io::Error) -> Self {
        Fail::Data(e.to_string())
    }
}

impl From<serde_json::Error> for Fail {
    fn from(e: serde_json::Error) -> Self {
        Fail::Data(e.to_string())
    }
}

type Res<T> = std::result::Result<T, Fail>;

fn usage(msg: impl Into<String>) -> Fail {
    Fail::Usage(msg.into())
}

/// Output directory plus the files written so far.
struct Sink {
    dir: PathBuf,
    files: Vec<String>,
}

impl Sink {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Res<()> {
        fs::write(self.dir.join(name), bytes)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json(&mut self, name: &str, v: &impl Serialize) -> Res<()> {
        let mut s = serde_json::to_string_pretty(v)?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    fn field(&mut self, name: &str, f: &GridField) -> Res<()> {
        self.write(name, &f.to_dsf1_bytes())
    }
}

fn sha_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn read_text(p: &Path) -> Res<String> {
    fs::read_to_string(p).map_err(|e| Fail::Data(format!("{}: {e}", p.display())))
}

fn read_field(p: &Path) -> Res<GridField> {
    let file = fs::File::open(p).map_err(|e| Fail::Data(format!("{}: {e}", p.display())))?;
    Ok(GridField::read_dsf1(std::io::BufReader::new(file))?)
}

fn read_dirs(p: &Path) -> Res<DirectionSet> {
    Ok(DirectionSet::from_json(&read_text(p)?)?)
}

fn read_tiles(p: &Path) -> Res<TileSet> {
    Ok(TileSet::from_json(&read_text(p)?)?)
}

fn parse_rational(s: &str) -> Res<BigRational> {
    BigRational::from_str(s.trim()).map_err(|_| usage(format!("not a rational number: {s:?}")))
}

fn parse_real(s: &str) -> Res<f64> {
    if s.contains('/') {
        let r = parse_rational(s)?;
        return Ok(crate::directions::rational_to_f64(&r));
    }
    s.trim().parse().map_err(|_| usage(format!("not a number: {s:?}")))
}

fn parse_list<T: FromStr>(s: &str) -> Res<Vec<T>> {
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| x.trim().parse().map_err(|_| usage(format!("bad list entry {x:?}"))))
        .collect()
}

fn ids_or_all(s: &Option<String>, len: usize) -> Res<Vec<usize>> {
    let ids = match s {
        Some(s) => parse_list::<usize>(s)?,
        None => (0..len).collect(),
    };
    if let Some(&bad) = ids.iter().find(|&&i| i >= len) {
        return Err(Fail::Data(format!("tile id {bad} out of range (set has {len})")));
    }
    Ok(ids)
}

fn multiplier(s: &str) -> Res<MultiplierSpec> {
    MultiplierSpec::parse(s).map_err(|e| usage(e.to_string()))
}

fn dirs_gen(a: &DirsGen, out: &mut Sink) -> Res<String> {
    let set = match a.family.as_str() {
        "uniform" => gen_uniform(a.n as usize)?,
        "lacunary" => gen_lacunary(&parse_rational(&a.ratio)?, a.n as usize, &parse_rational(&a.node)?)?,
        "cantor" => gen_cantor(a.q, a.n)?,
        "random" => gen_random(a.n as usize, a.seed)?,
        other => return Err(usage(format!("unknown family {other:?}"))),
    };
    let mut s = set.to_json()?;
    s.push('\n');
    out.write("directions.json", s.as_bytes())?;
    Ok(format!("{} directions", set.len()))
}

fn dirs_analyze(a: &DirsAnalyze, out: &mut Sink) -> Res<String> {
    let set = read_dirs(&a.dirs)?;
    let est = longest_lacunary_estimate(&set, a.resolution);
    let extracted = if set.len() >= 2 {
        Some(extract_lacunary_subsequence(&set)?)
    } else {
        None
    };
    let vargas = vargas_constant_estimate(&set).ok();
    out.json(
        "analysis.json",
        &json!({
            "count": set.len(),
            "resolution": a.resolution,
            "longest_estimate": est.length,
            "longest_certificate": est.certificate,
            "extracted": extracted,
            "vargas_constant": vargas,
        }),
    )?;
    Ok(format!("longest lacunary estimate {}", est.length))
}

fn field_gen(a: &FieldGen, out: &mut Sink) -> Res<String> {
    let f = match a.kind.as_str() {
        "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let real = a.real;
            GridField::from_fn(a.n, a.side, |_, _| {
                let re = rng.gen_range(-1.0..1.0);
                let im = if real { 0.0 } else { rng.gen_range(-1.0..1.0) };
                Complex64::new(re, im)
            })?
        }
        "ball" => extremizer_ball(a.n, a.side, a.radius.unwrap_or(a.side / 32.0))?,
        "mode" => {
            let k: Vec<i64> = parse_list(&a.k)?;
            if k.len() != 2 {
                return Err(usage("--k needs two integers"));
            }
            let n = a.n as i64;
            GridField::from_fn(a.n, a.side, |i, j| {
                let ph = (k[0] * i as i64 + k[1] * j as i64).rem_euclid(n);
                Complex64::from_polar(1.0, std::f64::consts::TAU * ph as f64 / n as f64)
            })?
        }
        other => return Err(usage(format!("unknown field kind {other:?}"))),
    };
    out.field("field.dsf1", &f)?;
    Ok(format!("{0}x{0} field", a.n))
}

fn field_info(a: &FieldIn, out: &mut Sink) -> Res<String> {
    let bytes = fs::read(&a.field).map_err(|e| Fail::Data(format!("{}: {e}", a.field.display())))?;
    let f = GridField::read_dsf1(&bytes[..])?;
    let mean = f.mean();
    out.json(
        "info.json",
        &json!({
            "n": f.n(),
            "side": f.side(),
            "l1": f.norm_lp(1.0),
            "l2": f.norm_l2(),
            "linf": f.max_abs(),
            "mean": [mean.re, mean.im],
            "real": f.is_real(0.0),
            "sha256": sha_hex(&bytes),
        }),
    )?;
    Ok(format!("l2 norm {}", f.norm_l2()))
}

fn modulus(f: &GridField) -> GridField {
    f.with_data(f.data().iter().map(|z| Complex64::new(z.norm(), 0.0)).collect())
}

fn op_apply(a: &OpApply, out: &mut Sink) -> Res<String> {
    let f = read_field(&a.field)?;
    let v = Direction::new(parse_rational(&a.direction)?);
    let g = directional_multiplier(&f, &v, &multiplier(&a.m)?)?;
    out.field("apply.dsf1", &if a.modulus { modulus(&g) } else { g })?;
    Ok("wrote apply.dsf1".into())
}

fn op_maximal(a: &OpMaximal, out: &mut Sink) -> Res<String> {
    let f = read_field(&a.field)?;
    let set = read_dirs(&a.dirs)?;
    if a.m == "average" {
        out.field("maximal.dsf1", &maximal_avg_directional(&f, &set))?;
        return Ok("wrote maximal.dsf1".into());
    }
    let r = maximal_directional_selected(&f, &set, &multiplier(&a.m)?)?;
    let values = if a.modulus { modulus(&r.values) } else { r.values };
    out.field("maximal.dsf1", &values)?;
    let mut csv = String::from("index,direction\n");
    for (i, d) in r.argmax.iter().enumerate() {
        csv.push_str(&format!("{i},{d}\n"));
    }
    out.write("argmax.csv", csv.as_bytes())?;
    Ok("wrote maximal.dsf1".into())
}

fn op_cone(a: &OpCone, out: &mut Sink) -> Res<String> {
    let f = read_field(&a.field)?;
    let arc = ConeArc::new(parse_rational(&a.start)?, parse_rational(&a.len)?)?;
    let g = match a.kind.as_str() {
        "rough" => cone_project(&f, &arc)?,
        "smooth" => smooth_cone_project(&f, &arc)?,
        "cover" => smooth_cover_project(&f, &arc)?,
        other => return Err(usage(format!("unknown cone kind {other:?}"))),
    };
    out.field("cone.dsf1", &g)?;
    Ok("wrote cone.dsf1".into())
}

fn op_lp(a: &OpLp, out: &mut Sink) -> Res<String> {
    let f = read_field(&a.field)?;
    let g = match a.k {
        Some(k) => lp_piece(&f, k),
        None => lp_square_function(&f),
    };
    out.field("lp.dsf1", &g)?;
    Ok("wrote lp.dsf1".into())
}

fn op_sq(a: &OpSq, out: &mut Sink) -> Res<String> {
    let f = read_field(&a.field)?;
    let g = lacunary_square_function(&f, &read_dirs(&a.dirs)?, &multiplier(&a.m)?)?;
    out.field("sq.dsf1", &g)?;
    Ok("wrote sq.dsf1".into())
}

fn bmo_source(a: &BmoSource, out: &mut Sink) -> Res<ProductCoefficients> {
    match &a.coeffs {
        Some(p) => Ok(ProductCoefficients::from_json(&read_text(p)?)?),
        None => {
            let b = ProductCoefficients::random(a.seed, a.count, a.depth);
            let mut s = b.to_json()?;
            s.push('\n');
            out.write("coeffs.json", s.as_bytes())?;
            Ok(b)
        }
    }
}

fn bmo_size(a: &BmoSource, out: &mut Sink) -> Res<String> {
    let b = bmo_source(a, out)?;
    let s = b.product_size()?;
    out.json(
        "size.json",
        &json!({ "entries": b.len(), "size": s.value, "exact": s.exact, "witness": s.witness }),
    )?;
    Ok(format!("size {}", s.value))
}

fn bmo_jn(a: &BmoJn, out: &mut Sink) -> Res<String> {
    let mut b = bmo_source(&a.source, out)?;
    if a.normalize {
        let s = b.product_size()?.value;
        if s == 0.0 {
            return Err(Fail::Data("family has zero size".into()));
        }
        b = b.scaled(1.0 / s);
    }
    let p = b.jn_level_set_profile(
        Raster {
            n: a.n,
            log2_side: a.log2_side,
        },
        a.levels,
    )?;
    let rate = p.decay_rate.is_finite().then_some(p.decay_rate);
    out.json(
        "jn.json",
        &json!({ "size": p.size, "lambdas": p.lambdas, "fractions": p.fractions, "decay_rate": rate }),
    )?;
    Ok(format!("decay rate {:?}", rate))
}

fn bmo_delta12(a: &FieldIn, out: &mut Sink) -> Res<String> {
    let f = read_field(&a.field)?;
    out.field("delta12.dsf1", &haar_delta12(&f))?;
    Ok("wrote delta12.dsf1".into())
}

fn tiles_build(a: &TilesBuild, out: &mut Sink) -> Res<String> {
    let set = build_tile_set(&parse_list::<i32>(&a.anns)?, &parse_list::<u32>(&a.arcs)?, a.n, a.side)?;
    let mut s = set.to_json()?;
    s.push('\n');
    out.write("tiles.json", s.as_bytes())?;
    Ok(format!("{} tiles", set.len()))
}

fn coefficients_for(set: &TileSet, p: &Path) -> Res<Vec<Complex64>> {
    let text = read_text(p)?;
    Ok(read_coefficients_csv(text.as_bytes(), set.len())?)
}

fn tiles_coeffs(a: &TilesCoeffs, out: &mut Sink) -> Res<String> {
    let set = read_tiles(&a.tiles)?;
    let f = read_field(&a.field)?;
    let bank = PacketBank::new(&set)?;
    let c = bank.coefficients(&f)?;
    let mut buf = Vec::new();
    write_coefficients_csv(&mut buf, &c)?;
    out.write("coeffs.csv", &buf)?;
    out.json("skipped.json", &bank.skipped())?;
    Ok(format!("{} coefficients, {} tiles skipped", c.len(), bank.skipped().len()))
}

fn tiles_decompose(a: &TilesDecompose, out: &mut Sink) -> Res<String> {
    let set = read_tiles(&a.tiles)?;
    let c = coefficients_for(&set, &a.coeffs)?;
    let mode = match a.mode.as_str() {
        "lacunary" => SizeMode::Lacunary,
        "conical" => SizeMode::Conical,
        other => return Err(usage(format!("unknown mode {other:?}"))),
    };
    let subset = ids_or_all(&a.subset, set.len())?;
    let forest = greedy_size_decompose(
        &set.tiles,
        &subset,
        &c,
        GreedyOptions {
            mode,
            saturate: a.saturate,
            exact_limit: a.exact_limit,
        },
    )?;
    let mut s = forest.to_json()?;
    s.push('\n');
    out.write("forest.json", s.as_bytes())?;
    Ok(format!("{} trees in {} rounds", forest.trees().count(), forest.rounds.len()))
}

fn tiles_saturate(a: &TilesSaturate, out: &mut Sink) -> Res<String> {
    let set = read_tiles(&a.tiles)?;
    let tree = ids_or_all(&Some(a.tree.clone()), set.len())?;
    let ambient = ids_or_all(&a.ambient, set.len())?;
    let s = saturate_conical(&set.tiles, &tree, &ambient)?;
    out.json("saturation.json", &s)?;
    Ok(format!("saturated tree has {} tiles", s.tree.tiles.len()))
}

fn tiles_modelsum(a: &TilesModelsum, out: &mut Sink) -> Res<String> {
    let set = read_tiles(&a.tiles)?;
    let c = coefficients_for(&set, &a.coeffs)?;
    let v = read_dirs(&a.dirs)?;
    let subset = ids_or_all(&a.subset, set.len())?;
    let bank = PacketBank::new(&set)?;
    let ms = model_sum_from_coeffs(&bank, &c, &set.tiles, &subset, &v)?;
    let (sq, sc) = square_ops_from_coeffs(set.n, set.side, &c, &set.tiles, &subset, &v)?;
    out.field("modelsum.dsf1", &ms.maximal)?;
    out.field("sq.dsf1", &sq)?;
    out.field("sc.dsf1", &sc)?;
    Ok("wrote modelsum.dsf1, sq.dsf1, sc.dsf1".into())
}

fn scan_norms(a: &ScanNorms, out: &mut Sink) -> Res<String> {
    let family = FamilyKind::parse(&a.family)?;
    let op = OpKind::parse(&a.op)?;
    let mut cfg = ScanConfig::new(family, a.counts.clone(), parse_real(&a.p)?, op, a.n);
    cfg.side = a.side;
    cfg.radius = a.radius.unwrap_or(a.side / 32.0);
    cfg.use_alt = !a.no_alt;
    let scan = growth_scan(&cfg)?;
    let mut buf = Vec::new();
    scan.write_csv(&mut buf)?;
    out.write("scan.csv", &buf)?;
    out.json("scan.json", &scan)?;
    for w in &scan.warnings {
        eprintln!("warning: {w}");
    }
    Ok(format!("{} certificates", scan.entries.len()))
}

fn dispatch(cmd: &Cmd, out: &mut Sink) -> Res<String> {
    match cmd {
        Cmd::Dirs(DirsCmd::Gen(a)) => dirs_gen(a, out),
        Cmd::Dirs(DirsCmd::Analyze(a)) => dirs_analyze(a, out),
        Cmd::Field(FieldCmd::Gen(a)) => field_gen(a, out),
        Cmd::Field(FieldCmd::Info(a)) => field_info(a, out),
        Cmd::Op(OpCmd::Apply(a)) => op_apply(a, out),
        Cmd::Op(OpCmd::Maximal(a)) => op_maximal(a, out),
        Cmd::Op(OpCmd::Cone(a)) => op_cone(a, out),
        Cmd::Op(OpCmd::Lp(a)) => op_lp(a, out),
        Cmd::Op(OpCmd::Sq(a)) => op_sq(a, out),
        Cmd::Bmo(BmoCmd::Size(a)) => bmo_size(a, out),
        Cmd::Bmo(BmoCmd::JnProfile(a)) => bmo_jn(a, out),
        Cmd::Bmo(BmoCmd::Delta12(a)) => bmo_delta12(a, out),
        Cmd::Tiles(TilesCmd::Build(a)) => tiles_build(a, out),
        Cmd::Tiles(TilesCmd::Coeffs(a)) => tiles_coeffs(a, out),
        Cmd::Tiles(TilesCmd::Decompose(a)) => tiles_decompose(a, out),
        Cmd::Tiles(TilesCmd::Saturate(a)) => tiles_saturate(a, out),
        Cmd::Tiles(TilesCmd::Modelsum(a)) => tiles_modelsum(a, out),
        Cmd::Scan(ScanCmd::Norms(a)) => scan_norms(a, out),
    }
}

/// Splices the entries of a `--params` JSON object into the argument list.
fn expand_params(args: Vec<String>) -> Res<Vec<String>> {
    let mut out = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        let path = if a == "--params" {
            match it.next() {
                Some(p) => p,
                None => return Err(usage("--params needs a path")),
            }
        } else if let Some(p) = a.strip_prefix("--params=") {
            p.to_string()
        } else {
            out.push(a);
            continue;
        };
        let v: Value = serde_json::from_str(&read_text(Path::new(&path))?)?;
        let Value::Object(map) = v else {
            return Err(Fail::Data("--params file must hold a JSON object".into()));
        };
        for (k, v) in map {
            let flag = format!("--{k}");
            match v {
                Value::Bool(true) => out.push(flag),
                Value::Bool(false) | Value::Null => {}
                Value::String(s) => out.extend([flag, s]),
                Value::Number(n) => out.extend([flag, n.to_string()]),
                Value::Array(xs) => {
                    let parts: Vec<String> = xs
                        .iter()
                        .map(|x| match x {
                            Value::String(s) => s.clone(),
                            other => other.to_string(),
                        })
                        .collect();
                    out.extend([flag, parts.join(",")]);
                }
                Value::Object(_) => return Err(Fail::Data(format!("parameter {k:?} is an object"))),
            }
        }
    }
    Ok(out)
}

fn write_manifest(sink: &Sink, config: &Value, wall: f64) -> Res<()> {
    let config_text = serde_json::to_string(config)?;
    let mut outputs = Vec::new();
    let mut files = sink.files.clone();
    files.sort();
    files.dedup();
    for name in &files {
        let bytes = fs::read(sink.dir.join(name))?;
        outputs.push(json!({ "path": name, "sha256": sha_hex(&bytes), "bytes": bytes.len() }));
    }
    let manifest = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "config_sha256": sha_hex(config_text.as_bytes()),
        "outputs": outputs,
        "wall_time_s": wall,
    });
    let mut s = serde_json::to_string_pretty(&manifest)?;
    s.push('\n');
    fs::write(sink.dir.join("manifest.json"), s)?;
    Ok(())
}

fn execute(args: Vec<String>) -> Res<()> {
    let start = Instant::now();
    let args = expand_params(args)?;
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    print!("{e}");
                    Ok(())
                }
                _ => Err(Fail::Usage(
                    e.to_string().trim_start_matches("error: ").trim_end().replace('\n', " "),
                )),
            };
        }
    };
    let dir = cli
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    fs::create_dir_all(&dir).map_err(|e| Fail::Data(format!("{}: {e}", dir.display())))?;
    let threads = cli.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| usage(e.to_string()))?;
    let mut sink = Sink { dir, files: Vec::new() };
    let summary = pool.install(|| dispatch(&cli.cmd, &mut sink))?;
    // Thread count and output location do not affect results, so they stay
    // out of the hashed configuration.
    let config = json!({ "command": serde_json::to_value(&cli.cmd)? });
    write_manifest(&sink, &config, start.elapsed().as_secs_f64())?;
    println!("{summary}");
    Ok(())
}

/// Runs the command line `argv` (program name first) and returns the exit
/// code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    match execute(argv.into_iter().map(Into::into).collect()) {
        Ok(()) => 0,
        Err(Fail::Usage(m)) => {
            eprintln!("E:usage: {m}");
            1
        }
        Err(Fail::Data(m)) => {
            eprintln!("E:data: {m}");
            2
        }
    }
}
