//! Inline 1-D density specs for the `scalespace` command:
//! `gauss:MU:VAR` or `mix:W,MU,VAR;W,MU,VAR;...`.

use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub struct DensitySpec {
    /// `(weight, mean, variance)` triples.
    pub components: Vec<(f64, f64, f64)>,
}

fn number(text: &str, what: &str, spec: &str) -> Result<f64, CliError> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("bad {what} `{text}` in density `{spec}`")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("{what} must be finite in density `{spec}`")))
    }
}

impl DensitySpec {
    pub fn parse(spec: &str) -> Result<Self, CliError> {
        let components = if let Some(rest) = spec.strip_prefix("gauss:") {
            let (mu, var) = rest
                .split_once(':')
                .ok_or_else(|| CliError::Usage(format!("expected gauss:MU:VAR, got `{spec}`")))?;
            vec![(1.0, number(mu, "mean", spec)?, number(var, "variance", spec)?)]
        } else if let Some(rest) = spec.strip_prefix("mix:") {
            rest.split(';')
                .filter(|c| !c.trim().is_empty())
                .map(|c| {
                    let parts: Vec<&str> = c.split(',').collect();
                    let [w, mu, var] = parts[..] else {
                        return Err(CliError::Usage(format!("mixture component `{c}` is not W,MU,VAR")));
                    };
                    Ok((
                        number(w, "weight", spec)?,
                        number(mu, "mean", spec)?,
                        number(var, "variance", spec)?,
                    ))
                })
                .collect::<Result<Vec<_>, _>>()?
        } else {
            return Err(CliError::Usage(format!(
                "unknown density `{spec}` (expected gauss:MU:VAR or mix:W,MU,VAR;...)"
            )));
        };
        if components.is_empty() || components.iter().any(|c| c.0 <= 0.0 || c.2 <= 0.0) {
            return Err(CliError::Usage(format!(
                "density `{spec}` needs at least one component with positive weight and variance"
            )));
        }
        Ok(Self { components })
    }

    /// Smallest interval holding every component to `k` standard
    /// deviations after smoothing up to `t_max`.
    pub fn support(&self, k: f64, t_max: f64) -> (f64, f64) {
        self.components
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, mu, var)| {
                let r = k * (var + t_max).sqrt();
                (lo.min(mu - r), hi.max(mu + r))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_forms() {
        assert_eq!(
            DensitySpec::parse("gauss:0:2").unwrap().components,
            vec![(1.0, 0.0, 2.0)]
        );
        let m = DensitySpec::parse("mix:0.5,-2,1;0.5,2,1").unwrap();
        assert_eq!(m.components, vec![(0.5, -2.0, 1.0), (0.5, 2.0, 1.0)]);
        for bad in ["gauss:0", "gauss:0:-1", "mix:1,2", "lap:0:1", "mix:", "gauss:x:1"] {
            assert!(DensitySpec::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn support_covers_smoothed_components() {
        let m = DensitySpec::parse("mix:0.5,-2,1;0.5,2,3").unwrap();
        // the wide component reaches further on both sides
        assert_eq!(m.support(8.0, 1.0), (2.0 - 16.0, 2.0 + 16.0));
        let g = DensitySpec::parse("gauss:1:3").unwrap();
        assert_eq!(g.support(4.0, 1.0), (-7.0, 9.0));
    }
}
