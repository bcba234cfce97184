use std::str::FromStr;

/// Inclusive linear grid written `min:max:steps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| if i + 1 == self.steps { self.max } else { self.min + step * i as f64 }).collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, steps] = parts.as_slice() else {
            return Err(format!("`{s}` is not min:max:steps"));
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
        let (min, max) = (num(min)?, num(max)?);
        let steps: usize = steps.trim().parse().map_err(|e| format!("`{steps}`: {e}"))?;
        if !min.is_finite() || !max.is_finite() {
            return Err("grid bounds must be finite".into());
        }
        if steps == 0 {
            return Err("grid needs at least one step".into());
        }
        if min > max {
            return Err(format!("grid bounds out of order: {min} > {max}"));
        }
        if steps == 1 && min != max {
            return Err(format!("a single-step grid needs min == max, got {min}:{max}"));
        }
        Ok(Grid { min, max, steps })
    }
}
