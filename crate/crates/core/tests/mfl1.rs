use mfl_core::{Domain, GridError, GridFunction};

#[test]
fn layout_is_header_then_little_endian_doubles() {
    let d = Domain::new(2, 1.5, 4).unwrap();
    let f = GridFunction::sample(d, |x| x[0] - 2.0 * x[1]).unwrap();
    let mut buf = Vec::new();
    f.write_mfl1(&mut buf).unwrap();
    let header = b"MFL1 n=2 L=1.5 G=4\n";
    assert_eq!(&buf[..header.len()], header);
    assert_eq!(buf.len(), header.len() + 8 * 16);
    let first = f64::from_le_bytes(buf[header.len()..header.len() + 8].try_into().unwrap());
    assert_eq!(first, f.values()[0]);
    assert_eq!(GridFunction::read_mfl1(buf.as_slice()).unwrap(), f);
}

#[test]
fn rejects_bad_files() {
    let d = Domain::new(1, 1.0, 4).unwrap();
    let mut buf = Vec::new();
    GridFunction::constant(d, 2.0).write_mfl1(&mut buf).unwrap();
    assert!(matches!(GridFunction::read_mfl1(&buf[..buf.len() - 8]), Err(GridError::Length { expected: 4, got: 3 })));
    assert!(matches!(GridFunction::read_mfl1(&b"MFL2 n=1 L=1 G=4\n"[..]), Err(GridError::Header(_))));
    assert!(matches!(GridFunction::read_mfl1(&b"MFL1 n=1 G=4 L=1\n"[..]), Err(GridError::Header(_))));
    let mut nan = b"MFL1 n=1 L=1 G=1\n".to_vec();
    nan.extend_from_slice(&f64::NAN.to_le_bytes());
    assert!(GridFunction::read_mfl1(nan.as_slice()).is_err());
}
