use borb::cache::{decode_matrix, encode_matrix, SpaceCache, MAGIC};
use borb::model::{build_model, ModelSpec};
use borb::quadrature::QuadratureConfig;
use std::fs;
use std::sync::Arc;

fn bitwise_eq(a: &borb::section_space::CMatrix, b: &borb::section_space::CMatrix) -> bool {
    a.shape() == b.shape()
        && a.iter()
            .zip(b.iter())
            .all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits())
}

#[test]
fn fs_gram_roundtrips_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let cache = SpaceCache::new(dir.path()).unwrap();
    let model = Arc::new(build_model(&ModelSpec::fs_sphere()).unwrap());
    let cfg = QuadratureConfig::default();
    let (a, hit) = cache.get_or_build(model.clone(), 16, false, &cfg).unwrap();
    assert!(!hit);
    let (b, hit) = cache.get_or_build(model, 16, false, &cfg).unwrap();
    assert!(hit);
    assert!(bitwise_eq(&a.gram, &b.gram));
    assert!(bitwise_eq(&a.ortho_coeffs, &b.ortho_coeffs));
    assert_eq!(a.gram_error.to_bits(), b.gram_error.to_bits());
}

#[test]
fn resolution_change_misses() {
    let dir = tempfile::tempdir().unwrap();
    let cache = SpaceCache::new(dir.path()).unwrap();
    let model = Arc::new(build_model(&ModelSpec::football(2)).unwrap());
    let cfg = QuadratureConfig::default();
    cache.get_or_build(model.clone(), 4, false, &cfg).unwrap();
    let coarse = QuadratureConfig {
        radial_nodes: 48,
        ..cfg
    };
    let (_, hit) = cache.get_or_build(model, 4, false, &coarse).unwrap();
    assert!(!hit);
}

#[test]
fn corrupt_files_miss() {
    let dir = tempfile::tempdir().unwrap();
    let cache = SpaceCache::new(dir.path()).unwrap();
    let model = Arc::new(build_model(&ModelSpec::fs_sphere()).unwrap());
    let cfg = QuadratureConfig::default();
    let (a, _) = cache.get_or_build(model.clone(), 6, false, &cfg).unwrap();
    let gram = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.to_string_lossy().ends_with(".gram.bin"))
        .unwrap();
    let bytes = fs::read(&gram).unwrap();

    fs::write(&gram, &bytes[..bytes.len() - 5]).unwrap();
    assert!(cache.load(&a.key()).is_none());
    let (_, hit) = cache.get_or_build(model.clone(), 6, false, &cfg).unwrap();
    assert!(!hit);

    let mut bad = fs::read(&gram).unwrap();
    bad[0] = b'X';
    fs::write(&gram, bad).unwrap();
    assert!(cache.load(&a.key()).is_none());
    let (b, hit) = cache.get_or_build(model, 6, false, &cfg).unwrap();
    assert!(!hit);
    assert!(bitwise_eq(&a.gram, &b.gram));
}

#[test]
fn header_layout() {
    let m = borb::section_space::CMatrix::from_fn(2, 3, |i, j| num_complex::Complex64::new(i as f64, j as f64));
    let b = encode_matrix(&m);
    assert_eq!(&b[..8], MAGIC);
    assert_eq!(u64::from_le_bytes(b[8..16].try_into().unwrap()), 2);
    assert_eq!(u64::from_le_bytes(b[16..24].try_into().unwrap()), 3);
    assert_eq!(b.len(), 24 + 16 * 6);
    assert_eq!(decode_matrix(&b).unwrap(), m);
    assert!(decode_matrix(&b[..30]).is_none());
}
