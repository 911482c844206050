//! Named example problems as problem-file text.

use crate::error::CliError;

pub const PRESETS: [&str; 4] = ["quadratic", "quadratic-affine", "cv90", "zero"];

/// Power-law exponent of the singular candidate of the `cv90` example.
pub const CV90_EXPONENT: f64 = 5.0 / 3.0;

/// `k = (3/5)^(5/3)`, scaling of the singular candidate `k t^(5/3)`.
pub fn cv90_k() -> f64 {
    0.6f64.powf(CV90_EXPONENT)
}

fn problem(lagrangian: &str, bc: [f64; 4]) -> String {
    format!(
        "[problem]\na = 0\nb = 1\nn = 1\nlagrangian = {lagrangian}\nx_a = {}\nx_b = {}\nxd_a = {}\nxd_b = {}\n",
        bc[0], bc[1], bc[2], bc[3]
    )
}

/// Problem-file text for a named preset.
pub fn preset(name: &str) -> Result<String, CliError> {
    let text = match name {
        "quadratic" => problem("pow(xdd1,2)", [0.0, 1.0, 0.0, 0.0]) + "\n[lavrentiev]\ncaps = 3, 20\n",
        "quadratic-affine" => problem("1*pow(xdd1,2)+2*xdd1", [0.0, 1.0, 0.0, 0.0]),
        "zero" => problem("pow(xdd1,2)", [0.0; 4]),
        "cv90" => {
            let k = cv90_k();
            problem(
                "pow(abs(pow(x1,2)-pow(xd1,5)),2)*pow(abs(xdd1),22)+0.01*pow(xdd1,2)",
                [0.0, k, 0.0, CV90_EXPONENT * k],
            ) + &format!("\n[lavrentiev]\ncaps = 5, 10, 20\nseed_power_law = {k}, {CV90_EXPONENT}\n")
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown preset `{other}` (expected one of {})",
                PRESETS.join(", ")
            )))
        }
    };
    Ok(text)
}
