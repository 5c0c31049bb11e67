//! Plain-text matrix dumps (row-major, 17 significant digits) for comparing
//! against external oracles.

use std::fs;
use std::path::Path;

use ndarray::Array2;

use crate::error::Result;
use crate::hamiltonian::{build_enlarged, diagonalize, JunctionModel};
use crate::redfield::{build_liouvillian, steady_state, RedfieldSetup};

pub fn format_matrix(a: &Array2<f64>) -> String {
    let mut s = String::new();
    for row in a.rows() {
        let line: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    s
}

/// Writes `hamiltonian.txt`, `coupling_hot.txt`, `coupling_cold.txt`,
/// `singular_values.txt`, `rho_re.txt` and `rho_im.txt` into `dir`.
pub fn dump(model: &JunctionModel, m: usize, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let es = build_enlarged(model, m)?;
    fs::write(dir.join("hamiltonian.txt"), format_matrix(&es.hamiltonian))?;
    fs::write(dir.join("coupling_hot.txt"), format_matrix(&es.coupling_hot))?;
    fs::write(dir.join("coupling_cold.txt"), format_matrix(&es.coupling_cold))?;
    let spectrum = diagonalize(&es)?;
    let ss = steady_state(&build_liouvillian(&RedfieldSetup::from_spectrum(&spectrum, model)))?;
    let sv: Vec<String> = ss.singular_values.iter().map(|x| format!("{x:.16e}")).collect();
    fs::write(dir.join("singular_values.txt"), sv.join("\n") + "\n")?;
    fs::write(dir.join("rho_re.txt"), format_matrix(&ss.rho.matrix().mapv(|z| z.re)))?;
    fs::write(dir.join("rho_im.txt"), format_matrix(&ss.rho.matrix().mapv(|z| z.im)))?;
    Ok(())
}
