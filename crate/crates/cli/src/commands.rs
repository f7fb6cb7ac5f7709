use std::collections::BTreeMap;
use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use serde_json::json;

use defect_perc::animals::{
    audited_census, check_cap, default_cap, exact_edge_pmf, exact_vertex_pmf,
    max_edges_for_vertices, supermult_audit, AnimalSpec,
};
use defect_perc::estimator::{curve_table, estimate_sigma_star, known_pc, CrossingFamily};
use defect_perc::meanfield;
use defect_perc::observables::{
    decay_fit, inequality_audit, regime_exponents, sample_distribution, AuditConfig,
};
use defect_perc::sampler::{
    convolve_grid, homogeneous_sweep, sweep as run_sweep, CanonicalCurve, FacePairs, Faces,
    MicrocanonicalCurve, SweepMode, SweepParams, FORMAT_VERSION,
};
use defect_perc::stream::GENERATOR_NAME;
use defect_perc::{build_edge_table, LatticeSpec};

use crate::grid::parse_grid;
use crate::output::{config_hash, json as to_json, read, timestamp, write};
use crate::{
    AnimalArgs, AuditArgs, ClusterArgs, ConvolveArgs, EstimateArgs, Format, HomogArgs,
    MeanFieldArgs, SweepArgs,
};

pub fn sweep(a: &SweepArgs) -> Result<()> {
    let face_pairs = if a.all_faces {
        FacePairs::AllVertical
    } else {
        FacePairs::First
    };
    let config = json!({
        "command": "sweep",
        "format": FORMAT_VERSION,
        "rng": GENERATOR_NAME,
        "d": a.d,
        "s": a.s,
        "L": a.sizes,
        "p": a.p,
        "realizations": a.realizations,
        "seed": a.common.seed,
        "all_faces": a.all_faces,
    });
    let hash = config_hash(&config)?;
    for &p in &a.p {
        for &l in &a.sizes {
            let spec = LatticeSpec::free(a.d, a.s, l)?;
            let table = build_edge_table(&spec)?;
            let faces = Faces::new(&spec, face_pairs)?;
            let params = SweepParams {
                p,
                realizations: a.realizations,
                seed: a.common.seed,
                workers: a.common.workers,
                face_pairs,
            };
            let mut curve = run_sweep(&table, &faces, &params)?;
            stamp(&mut curve, &hash, a.common.workers);
            write(
                &a.common.out,
                &format!("micro_d{}_s{}_p{p}_L{l}.json", a.d, a.s),
                &curve.to_json()?,
            )?;
        }
    }
    Ok(())
}

fn stamp(curve: &mut MicrocanonicalCurve, hash: &str, workers: usize) {
    curve.meta.config_hash = Some(hash.to_string());
    curve.meta.workers = Some(workers);
    curve.meta.timestamp = Some(timestamp());
}

fn canonical_csv(c: &CanonicalCurve) -> String {
    let m = &c.meta;
    let mut out = format!(
        "# format={FORMAT_VERSION} kind=canonical d={} s={} L={} p={} mode={:?} trials={}\n",
        m.d,
        m.s,
        m.half_side,
        m.p.map_or("none".to_string(), |p| p.to_string()),
        m.mode,
        m.trials()
    );
    out.push_str("sigma,Q,stderr\n");
    for ((x, q), e) in c.sigma_grid.iter().zip(&c.values).zip(&c.stderr) {
        let _ = writeln!(out, "{x},{q},{e}");
    }
    out
}

pub fn convolve(a: &ConvolveArgs) -> Result<()> {
    let grid = parse_grid(&a.sigma_grid)?;
    for path in &a.files {
        let curve = MicrocanonicalCurve::from_json(&read(path)?)
            .with_context(|| format!("loading {}", path.display()))?;
        let canonical = convolve_grid(&curve, &grid)?;
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("curve")
            .trim_start_matches("micro_");
        match a.format {
            Format::Json => write(&a.out, &format!("canonical_{stem}.json"), &canonical.to_json()?)?,
            Format::Csv => write(&a.out, &format!("canonical_{stem}.csv"), &canonical_csv(&canonical))?,
        };
    }
    Ok(())
}

pub fn estimate(a: &EstimateArgs) -> Result<()> {
    let mut curves = Vec::with_capacity(a.files.len());
    for path in &a.files {
        let c = CanonicalCurve::from_json(&read(path)?)
            .with_context(|| format!("loading {}", path.display()))?;
        curves.push(c);
    }
    let (d, s) = (curves[0].meta.d, curves[0].meta.s);
    if curves.iter().any(|c| c.meta.d != d || c.meta.s != s) {
        bail!("curves mix different (d, s)");
    }
    // group by ensemble: sweep mode and bulk density
    let mut groups: BTreeMap<(bool, u64), Vec<CanonicalCurve>> = BTreeMap::new();
    for c in curves {
        let key = (
            c.meta.mode == SweepMode::Homogeneous,
            c.meta.p.map_or(0, f64::to_bits),
        );
        groups.entry(key).or_default().push(c);
    }
    let mut estimates = Vec::new();
    for group in groups.values() {
        let family = CrossingFamily::from_canonical(group, a.force)?;
        let est = estimate_sigma_star(&family).with_context(|| {
            format!("estimating from sizes {:?} at p = {:?}", family.sizes, family.p)
        })?;
        estimates.push(est);
    }
    let files: Vec<String> = a.files.iter().map(|p| p.display().to_string()).collect();
    let doc = json!({
        "format": FORMAT_VERSION,
        "config": { "command": "estimate", "files": files, "force": a.force },
        "estimates": estimates,
    });
    write(&a.out, &format!("estimate_d{d}_s{s}.json"), &to_json(&doc)?)?;
    let defect: Vec<_> = estimates.iter().filter(|e| e.p.is_some()).cloned().collect();
    for e in &estimates {
        let what = e.p.map_or("p_c".to_string(), |p| format!("sigma*({p})"));
        println!(
            "{what} = {:.5} +- {:.5} (stat {:.5}, sys {:.5}) from L = {:?}",
            e.sigma_star, e.combined_err, e.stat_err, e.sys_err, e.sizes
        );
    }
    if !defect.is_empty() {
        let table = curve_table(d, s, &defect, known_pc(d), known_pc(s))?;
        let csv = table.to_csv();
        write(&a.out, &format!("critical_curve_d{d}_s{s}.csv"), &csv)?;
        print!("{csv}");
        for row in table.rows.iter().filter(|r| !r.flags.is_empty()) {
            log::warn!("p = {}: {}", row.p, row.flags.join("; "));
        }
    }
    Ok(())
}

pub fn cluster_dist(a: &ClusterArgs) -> Result<()> {
    let spec = LatticeSpec::free(a.d, a.s, a.half_side)?;
    let dist = sample_distribution(
        &spec,
        a.p,
        a.sigma,
        a.common.seed,
        0..a.samples,
        a.common.workers,
    )?;
    let report = decay_fit(&dist, &regime_exponents(a.d, a.s));
    let tag = format!("d{}_s{}_N{}_p{}_sigma{}", a.d, a.s, a.half_side, a.p, a.sigma);
    match a.format {
        Format::Json => {
            write(&a.common.out, &format!("cluster_{tag}.json"), &dist.to_json()?)?;
        }
        Format::Csv => {
            let mut csv = format!(
                "# format={FORMAT_VERSION} kind=cluster d={} s={} N={} p={} sigma={} seed={} samples={} boundary={}\n",
                a.d, a.s, a.half_side, a.p, a.sigma, a.common.seed, dist.samples, dist.boundary_count
            );
            csv.push_str("size,vertex_count,edge_count\n");
            let len = dist.hist_v.len().max(dist.hist_e.len());
            for n in 0..len {
                let v = dist.hist_v.get(n).copied().unwrap_or(0);
                let e = dist.hist_e.get(n).copied().unwrap_or(0);
                let _ = writeln!(csv, "{n},{v},{e}");
            }
            write(&a.common.out, &format!("cluster_{tag}.csv"), &csv)?;
        }
    }
    let doc = json!({
        "format": FORMAT_VERSION,
        "config": {
            "command": "cluster-dist", "d": a.d, "s": a.s, "N": a.half_side, "p": a.p,
            "sigma": a.sigma, "samples": a.samples, "seed": a.common.seed, "rng": GENERATOR_NAME,
        },
        "boundary_fraction": dist.boundary_fraction(),
        "decay": report,
    });
    write(&a.common.out, &format!("decay_{tag}.json"), &to_json(&doc)?)?;
    match report.selected_alpha() {
        Some(alpha) => println!("decay exponent: alpha = {alpha:.4}"),
        None => println!("decay exponent: inconclusive"),
    }
    Ok(())
}

pub fn meanfield(a: &MeanFieldArgs) -> Result<()> {
    let grid = parse_grid(&a.p_grid)?;
    let rows = meanfield::table(&grid, a.d, a.s, a.sigma_c)?;
    let mut csv = format!(
        "# format={FORMAT_VERSION} kind=meanfield d={} s={} sigma_c={}\n",
        a.d, a.s, a.sigma_c
    );
    csv.push_str("p,sigma_mf,sigma_mf_cubic,valid\n");
    for r in &rows {
        let _ = writeln!(csv, "{},{},{},{}", r.p, r.sigma_mf, r.sigma_mf_cubic, r.valid);
    }
    write(&a.out, &format!("meanfield_d{}_s{}.csv", a.d, a.s), &csv)?;
    print!("{csv}");
    Ok(())
}

const SUPERMULT_GRID: [f64; 3] = [0.5, 1.0, 2.0];

pub fn animals(a: &AnimalArgs) -> Result<()> {
    let spec = AnimalSpec::new(a.d, a.s)?;
    let cap = a.max_edges.unwrap_or_else(|| default_cap(a.d));
    if !a.force {
        check_cap(spec, cap)?;
    }
    let (census, identity) = audited_census(spec, cap)?;
    let tag = format!("d{}_s{}_n{cap}", a.d, a.s);
    write(&a.out, &format!("census_{tag}.csv"), &census.to_csv())?;

    let mut supermult = Vec::new();
    for &x in &SUPERMULT_GRID {
        for &y in &SUPERMULT_GRID {
            for &z in &SUPERMULT_GRID {
                for n1 in 0..=cap.saturating_sub(2) {
                    for n2 in n1..=cap.saturating_sub(2) - n1 {
                        let check = supermult_audit(&census, x, y, z, n1, n2)?;
                        supermult.push(json!({
                            "x": x, "y": y, "z": z, "n1": n1, "n2": n2,
                            "lhs": check.lhs, "rhs": check.rhs, "holds": check.holds,
                        }));
                    }
                }
            }
        }
    }
    let failures = supermult.iter().filter(|c| c["holds"] == false).count();
    let doc = json!({
        "format": FORMAT_VERSION,
        "config": { "command": "animals", "d": a.d, "s": a.s, "max_edges": cap },
        "animals": census.total(),
        "identity": identity,
        "supermult_failures": failures,
        "supermult": supermult,
    });
    write(&a.out, &format!("animals_audit_{tag}.json"), &to_json(&doc)?)?;
    println!(
        "{} animals; identity violations: {}; reference match (n <= {}): {}; supermultiplicativity failures: {failures}",
        identity.animals, identity.violations, identity.reference_max_edges, identity.reference_match
    );

    if let (Some(p), Some(sigma)) = (a.p, a.sigma) {
        let mut csv = format!(
            "# format={FORMAT_VERSION} kind=exact_pmf d={} s={} p={p} sigma={sigma} max_edges={cap}\n",
            a.d, a.s
        );
        csv.push_str("kind,size,probability\n");
        for n in 0..=cap {
            let _ = writeln!(csv, "edges,{n},{}", exact_edge_pmf(&census, p, sigma, n)?);
        }
        let mut v = 1;
        while max_edges_for_vertices(a.d, v) <= cap {
            let _ = writeln!(csv, "vertices,{v},{}", exact_vertex_pmf(&census, p, sigma, v)?);
            v += 1;
        }
        write(&a.out, &format!("pmf_{tag}_p{p}_sigma{sigma}.csv"), &csv)?;
        print!("{csv}");
    }
    if identity.pass() && failures == 0 {
        Ok(())
    } else {
        bail!("animal audits failed: {:?}", identity.examples)
    }
}

pub fn audit_ineq(a: &AuditArgs) -> Result<()> {
    let cfg = AuditConfig {
        spec: LatticeSpec::free(a.d, a.s, a.half_side)?,
        p: a.p,
        sigma: a.sigma,
        gamma: a.gamma,
        step: a.step,
        samples_per_point: a.samples,
        batches: a.batches,
        seed: a.common.seed,
        workers: a.common.workers,
    };
    let report = inequality_audit(&cfg)?;
    let tag = format!(
        "d{}_s{}_N{}_p{}_sigma{}_gamma{}",
        a.d, a.s, a.half_side, a.p, a.sigma, a.gamma
    );
    let doc = json!({ "format": FORMAT_VERSION, "report": report });
    write(&a.common.out, &format!("audit_{tag}.json"), &to_json(&doc)?)?;
    for (name, c) in [("first", report.first), ("second", report.second)] {
        println!(
            "{name}: lhs {:.6} rhs {:.6} slack {:.6} +- {:.6} {}",
            c.lhs,
            c.rhs,
            c.slack,
            c.stderr,
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
    Ok(())
}

pub fn homog(a: &HomogArgs) -> Result<()> {
    let grid = parse_grid(&a.p_grid)?;
    let config = json!({
        "command": "homog",
        "format": FORMAT_VERSION,
        "rng": GENERATOR_NAME,
        "d": a.d,
        "L": a.sizes,
        "realizations": a.realizations,
        "seed": a.common.seed,
    });
    let hash = config_hash(&config)?;
    let mut canonical = Vec::with_capacity(a.sizes.len());
    for &l in &a.sizes {
        let spec = LatticeSpec::free(a.d, a.d, l)?;
        let table = build_edge_table(&spec)?;
        let faces = Faces::new(&spec, FacePairs::First)?;
        let params = SweepParams {
            p: 0.0,
            realizations: a.realizations,
            seed: a.common.seed,
            workers: a.common.workers,
            face_pairs: FacePairs::First,
        };
        let mut curve = homogeneous_sweep(&table, &faces, &params)?;
        stamp(&mut curve, &hash, a.common.workers);
        write(
            &a.common.out,
            &format!("homog_micro_d{}_L{l}.json", a.d),
            &curve.to_json()?,
        )?;
        let c = convolve_grid(&curve, &grid)?;
        write(
            &a.common.out,
            &format!("homog_canonical_d{}_L{l}.json", a.d),
            &c.to_json()?,
        )?;
        canonical.push(c);
    }
    if a.sizes.len() >= 3 {
        let family = CrossingFamily::from_canonical(&canonical, false)?;
        let est = estimate_sigma_star(&family)?;
        println!(
            "p_c({}) = {:.5} +- {:.5} (stat {:.5}, sys {:.5}) from L = {:?}",
            a.d, est.sigma_star, est.combined_err, est.stat_err, est.sys_err, est.sizes
        );
        let doc = json!({ "format": FORMAT_VERSION, "config": config, "estimate": est });
        write(&a.common.out, &format!("homog_estimate_d{}.json", a.d), &to_json(&doc)?)?;
    } else {
        println!("fewer than 3 sizes: curves written, no estimate");
    }
    Ok(())
}
