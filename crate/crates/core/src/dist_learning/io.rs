use std::io::{BufRead, Write};

use super::LearnedPrior;
use crate::rotation::RotationDistribution;
use crate::{Error, Real, Result};

/// Metadata as `# key=value` lines, then `offset,probability` rows.
pub fn write_prior_csv<W: Write, T: Real>(prior: &LearnedPrior<T>, mut w: W) -> Result<()> {
    writeln!(w, "# grid_size={}", prior.grid_size())?;
    writeln!(w, "# window_offset={}", prior.pmf.window_offset())?;
    writeln!(w, "# sigma={:e}", prior.sigma)?;
    writeln!(w, "# n_per_trial={}", prior.n_per_trial)?;
    writeln!(w, "# repetitions={}", prior.repetitions)?;
    writeln!(w, "# method={}", prior.method)?;
    writeln!(w, "# source={}", prior.source)?;
    writeln!(w, "# seed={}", prior.seed)?;
    writeln!(w, "offset,probability")?;
    for (l, p) in prior.pmf.offsets().zip(prior.pmf.pmf()) {
        writeln!(w, "{l},{:e}", p.as_f64())?;
    }
    Ok(())
}

fn field<'a>(meta: &'a [(String, String)], key: &str) -> Result<&'a str> {
    meta.iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| Error::Format(format!("prior metadata lacks `{key}`")))
}

fn parse<V: std::str::FromStr>(s: &str, what: &str) -> Result<V> {
    s.trim().parse().map_err(|_| Error::Format(format!("bad {what}: `{s}`")))
}

pub fn read_prior_csv<R: BufRead, T: Real>(r: R) -> Result<LearnedPrior<T>> {
    let mut meta = Vec::new();
    let mut rows: Vec<(i64, f64)> = Vec::new();
    let mut header_seen = false;
    for line in r.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.trim().split_once('=') {
                meta.push((k.trim().to_string(), v.trim().to_string()));
            }
            continue;
        }
        if !header_seen {
            if line != "offset,probability" {
                return Err(Error::Format(format!("unexpected prior header `{line}`")));
            }
            header_seen = true;
            continue;
        }
        let (l, p) = line.split_once(',').ok_or_else(|| Error::Format(format!("bad prior row `{line}`")))?;
        rows.push((parse(l, "offset")?, parse(p, "probability")?));
    }
    let grid_size: usize = parse(field(&meta, "grid_size")?, "grid_size")?;
    let first = rows.first().ok_or_else(|| Error::Format("prior has no rows".into()))?.0;
    for (i, (l, _)) in rows.iter().enumerate() {
        if *l != first + i as i64 {
            return Err(Error::Format("prior offsets are not contiguous".into()));
        }
    }
    let pmf = rows.iter().map(|(_, p)| T::of(*p)).collect();
    Ok(LearnedPrior {
        pmf: RotationDistribution::from_weights(grid_size, first, pmf)?,
        sigma: parse(field(&meta, "sigma")?, "sigma")?,
        n_per_trial: parse(field(&meta, "n_per_trial")?, "n_per_trial")?,
        repetitions: parse(field(&meta, "repetitions")?, "repetitions")?,
        method: field(&meta, "method")?.to_string(),
        source: field(&meta, "source")?.to_string(),
        seed: parse(field(&meta, "seed")?, "seed")?,
    })
}
