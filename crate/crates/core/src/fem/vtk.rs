use std::fmt::Write as _;
use std::path::Path;

use crate::mesh::Mesh;
use crate::{Error, Result, Vec3};

/// Per-vertex data for export.
#[derive(Debug, Clone, PartialEq)]
pub enum VtkData {
    Scalars(Vec<f64>),
    Vectors(Vec<Vec3>),
}

impl VtkData {
    fn len(&self) -> usize {
        match self {
            VtkData::Scalars(v) => v.len(),
            VtkData::Vectors(v) => v.len(),
        }
    }
}

/// Legacy ASCII VTK unstructured grid with point data, one tetrahedral cell
/// (type 10) per mesh tet.
pub fn vtk_string(mesh: &Mesh, fields: &[(&str, VtkData)]) -> Result<String> {
    let nv = mesh.n_vertices();
    for (name, data) in fields {
        if data.len() != nv {
            return Err(Error::InvalidInput(format!(
                "field '{name}' has {} values for {nv} vertices",
                data.len()
            )));
        }
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(Error::InvalidInput(format!("invalid VTK field name '{name}'")));
        }
    }
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\nlamefem\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(out, "POINTS {nv} double");
    for p in mesh.vertices() {
        let _ = writeln!(out, "{:.16e} {:.16e} {:.16e}", p.x, p.y, p.z);
    }
    let nt = mesh.n_tets();
    let _ = writeln!(out, "CELLS {nt} {}", 5 * nt);
    for t in mesh.tets() {
        let _ = writeln!(out, "4 {} {} {} {}", t[0], t[1], t[2], t[3]);
    }
    let _ = writeln!(out, "CELL_TYPES {nt}");
    for _ in 0..nt {
        out.push_str("10\n");
    }
    if !fields.is_empty() {
        let _ = writeln!(out, "POINT_DATA {nv}");
    }
    for (name, data) in fields {
        match data {
            VtkData::Scalars(values) => {
                let _ = writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default");
                for v in values {
                    let _ = writeln!(out, "{v:.16e}");
                }
            }
            VtkData::Vectors(values) => {
                let _ = writeln!(out, "VECTORS {name} double");
                for v in values {
                    let _ = writeln!(out, "{:.16e} {:.16e} {:.16e}", v.x, v.y, v.z);
                }
            }
        }
    }
    Ok(out)
}

pub fn export_vtk(path: impl AsRef<Path>, mesh: &Mesh, fields: &[(&str, VtkData)]) -> Result<()> {
    std::fs::write(path, vtk_string(mesh, fields)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_box_mesh;

    #[test]
    fn scalar_block() {
        let m = generate_box_mesh([1, 1, 1], [1.0; 3]).unwrap();
        let s = vtk_string(&m, &[("p", VtkData::Scalars(vec![1.0; 8]))]).unwrap();
        assert!(s.contains("DATASET UNSTRUCTURED_GRID"));
        assert_eq!(s.matches("SCALARS").count(), 1);
        assert!(s.contains("CELL_TYPES 6\n10\n"));
    }

    #[test]
    fn vector_block_and_determinism() {
        let m = generate_box_mesh([1, 1, 1], [1.0; 3]).unwrap();
        let data = VtkData::Vectors(m.vertices().to_vec());
        let a = vtk_string(&m, &[("u", data.clone())]).unwrap();
        let b = vtk_string(&m, &[("u", data)]).unwrap();
        assert_eq!(a, b);
        let block = a.split("VECTORS u double\n").nth(1).unwrap();
        assert_eq!(block.lines().count(), 8);
        assert!(block.lines().all(|l| l.split(' ').count() == 3));
    }

    #[test]
    fn length_mismatch_rejected() {
        let m = generate_box_mesh([1, 1, 1], [1.0; 3]).unwrap();
        assert!(vtk_string(&m, &[("p", VtkData::Scalars(vec![0.0; 3]))]).is_err());
    }

    #[test]
    fn file_round_trip() {
        let m = generate_box_mesh([1, 1, 1], [1.0; 3]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.vtk");
        export_vtk(&path, &m, &[]).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), vtk_string(&m, &[]).unwrap());
    }
}
