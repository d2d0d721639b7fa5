use pyo3::prelude::*;

#[pymodule]
fn sairy_py(_m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
