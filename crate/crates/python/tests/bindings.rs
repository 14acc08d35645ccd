use std::ffi::CString;

use pyo3::prelude::*;

fn run(script: &str) {
    Python::attach(|py| {
        let m = pyo3::wrap_pymodule!(corrbi_py::corrbi_py)(py);
        let sys = py.import("sys").unwrap();
        sys.getattr("modules").unwrap().set_item("corrbi_py", m).unwrap();
        let code = CString::new(script).unwrap();
        if let Err(e) = py.run(&code, None, None) {
            e.display(py);
            panic!("script failed");
        }
    });
}

#[test]
fn stages_from_python() {
    run(r#"
import corrbi_py as cb
g = cb.Graph(1, [(0, 0), (0, 0)], [0])
assert [g.core_stage(n).dim for n in range(3)] == [1, 4, 16]
assert g.with_relative([]).core_stage(2).blocks == [1, 2, 4]
assert g.correspondence().tensor(g.correspondence()).multiplicity == [[4]]
assert cb.rank([[1, 1j], [-1j, 1]]) == 1
"#);
}

#[test]
fn reports_from_python() {
    run(r#"
import corrbi_py as cb
ok, reports = cb.coherence(3, seed=1)
assert ok and len(reports) == 6 and reports[0]["status"] == "pass"
try:
    cb.validate("{")
    raise AssertionError("accepted")
except ValueError:
    pass
"#);
}
