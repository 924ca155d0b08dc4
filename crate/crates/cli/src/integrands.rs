//! Named test functions for `integrate` and the verification suites.

use oufield::{SeparableSum, Univariate};

use crate::error::{config, CliResult};

pub const NAMES: &[&str] = &["one", "sum", "product", "exp", "sin", "mix"];

/// `one` = 1, `sum` = Σx_i, `product` = ∏x_i, `exp` = e^{Σx_i},
/// `sin` = ∏ sin(x_i + 0.3), `mix` = e^{Σx_i/2} + ∏ sin(2x_i) + ∏x_i².
pub fn builtin(name: &str, dim: usize) -> CliResult<SeparableSum> {
    let f = match name {
        "one" => SeparableSum::constant(dim, 1.0),
        "sum" => (0..dim).fold(SeparableSum::new(dim), |acc, a| {
            let factors = (0..dim)
                .map(|b| {
                    if a == b {
                        Univariate::identity()
                    } else {
                        Univariate::one()
                    }
                })
                .collect();
            acc.with_term(1.0, factors)
        }),
        "product" => SeparableSum::product(dim),
        "exp" => SeparableSum::exp_linear(&vec![1.0; dim]),
        "sin" => SeparableSum::new(dim).with_term(1.0, vec![Univariate::Sin { freq: 1.0, phase: 0.3 }; dim]),
        "mix" => SeparableSum::exp_linear(&vec![0.5; dim])
            .with_term(1.0, vec![Univariate::Sin { freq: 2.0, phase: 0.0 }; dim])
            .with_term(
                1.0,
                vec![
                    Univariate::Poly {
                        coeffs: vec![0.0, 0.0, 1.0]
                    };
                    dim
                ],
            ),
        other => {
            return Err(config(format!(
                "unknown function `{other}`; choose one of {}",
                NAMES.join(", ")
            )))
        }
    };
    Ok(f)
}
