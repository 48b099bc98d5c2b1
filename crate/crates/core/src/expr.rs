//! Arithmetic expressions in two variables (`x`, `y` unless renamed), used
//! by system files and the command line.

use std::fmt;
use std::str::FromStr;

use meval::{Context, Expr as MevalExpr};

use crate::error::{Error, Result};

thread_local! {
    static CONTEXT: Context<'static> = {
        let mut ctx = Context::new();
        ctx.func("log", f64::ln);
        ctx
    };
}

/// A parsed expression. Cheap to clone and safe to share between threads;
/// evaluation uses a per-thread function table.
#[derive(Clone)]
pub struct Expr {
    source: String,
    parsed: MevalExpr,
    vars: [&'static str; 2],
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({:?})", self.source)
    }
}

impl Expr {
    pub fn parse(source: &str) -> Result<Self> {
        Self::parse_with(source, ["x", "y"])
    }

    /// Expression in the single variable `var`, evaluated as `eval(v, _)`.
    pub fn parse_univariate(source: &str, var: &'static str) -> Result<Self> {
        // The second slot gets a name no user expression can mention.
        Self::parse_with(source, [var, "_unused"])
    }

    fn parse_with(source: &str, vars: [&'static str; 2]) -> Result<Self> {
        let parsed = MevalExpr::from_str(source).map_err(|e| Error::Parse(format!("`{source}`: {e}")))?;
        let e = Expr { source: source.to_string(), parsed, vars };
        // Reject unknown names up front rather than at the first evaluation.
        e.try_eval(0.3, 0.7)?;
        Ok(e)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    fn try_eval(&self, x: f64, y: f64) -> Result<f64> {
        CONTEXT.with(|ctx| {
            self.parsed
                .eval_with_context(((self.vars[0], x), ((self.vars[1], y), ctx)))
                .map_err(|e| Error::Parse(format!("`{}`: {e}", self.source)))
        })
    }

    /// Evaluates at `(x, y)`; NaN if evaluation fails.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.try_eval(x, y).unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar_covers_the_usual_functions() {
        let e = Expr::parse("x^2 - 3*y + sin(x)*cos(y) + exp(0) + log(e) + sqrt(4)").unwrap();
        let v = e.eval(2.0, 1.0);
        let want = 4.0 - 3.0 + 2f64.sin() * 1f64.cos() + 1.0 + 1.0 + 2.0;
        assert!((v - want).abs() < 1e-14);
    }

    #[test]
    fn unknown_variable_is_rejected() {
        assert!(matches!(Expr::parse("x + z"), Err(Error::Parse(_))));
        assert!(matches!(Expr::parse("x +* 2"), Err(Error::Parse(_))));
    }

    #[test]
    fn single_variable() {
        let e = Expr::parse_univariate("exp(-1/h^2)", "h").unwrap();
        assert!((e.eval(1.0, 0.0) - (-1f64).exp()).abs() < 1e-15);
        assert!(Expr::parse_univariate("h + x", "h").is_err());
    }
}
