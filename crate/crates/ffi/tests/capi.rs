use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use spin7_ffi::*;

fn last_error() -> String {
    let p = spin7_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(spin7_version()) }.to_str().unwrap();
    assert!(v.starts_with(env!("CARGO_PKG_VERSION")));
}

#[test]
fn cayley_form_round_trip() {
    unsafe {
        let mut omega = ptr::null_mut();
        assert_eq!(spin7_form_cayley(&mut omega), Spin7Status::Ok);
        let mut grade = 0;
        assert_eq!(spin7_form_grade(omega, &mut grade), Spin7Status::Ok);
        assert_eq!(grade, 4);

        let mut json = ptr::null_mut();
        assert_eq!(spin7_form_to_json(omega, &mut json), Spin7Status::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(spin7_form_from_json(json, &mut back), Spin7Status::Ok);
        spin7_string_free(json);

        let mut sq = ptr::null_mut();
        assert_eq!(spin7_form_wedge(omega, back, &mut sq), Spin7Status::Ok);
        let mut norm = 0.0;
        assert_eq!(spin7_form_norm(sq, &mut norm), Spin7Status::Ok);
        assert!((norm - 14.0).abs() < 1e-12);

        let mut star = ptr::null_mut();
        assert_eq!(spin7_form_hodge_star(omega, &mut star), Spin7Status::Ok);
        assert_eq!(spin7_form_norm(star, &mut norm), Spin7Status::Ok);
        assert!((norm - 14f64.sqrt()).abs() < 1e-12);

        for f in [omega, back, sq, star] {
            spin7_form_free(f);
        }
    }
}

#[test]
fn split_of_kahler_form() {
    let json = CString::new(
        r#"{"grade":2,"terms":[{"idx":[1,2],"c":1},{"idx":[3,4],"c":1},{"idx":[5,6],"c":1},{"idx":[7,8],"c":1}]}"#,
    )
    .unwrap();
    unsafe {
        let mut w = ptr::null_mut();
        assert_eq!(spin7_form_from_json(json.as_ptr(), &mut w), Spin7Status::Ok);
        let (mut p7, mut p21) = (0.0, 0.0);
        assert_eq!(spin7_form_split_norms(w, &mut p7, &mut p21), Spin7Status::Ok);
        assert_eq!((p7, p21), (2.0, 0.0));
        spin7_form_free(w);
    }
}

#[test]
fn errors_set_message() {
    unsafe {
        let bad = CString::new(r#"{"grade":2,"terms":[{"idx":[2,1],"c":1}]}"#).unwrap();
        let mut f = ptr::null_mut();
        assert_eq!(spin7_form_from_json(bad.as_ptr(), &mut f), Spin7Status::InvalidArgument);
        assert!(f.is_null());
        assert!(last_error().contains("malformed"));

        assert_eq!(spin7_form_from_json(ptr::null(), &mut f), Spin7Status::NullPointer);
        assert!(last_error().contains("json"));

        let mut grade = 0;
        assert_eq!(spin7_form_grade(ptr::null(), &mut grade), Spin7Status::NullPointer);

        let mut omega = ptr::null_mut();
        assert_eq!(spin7_form_cayley(&mut omega), Spin7Status::Ok);
        assert!(spin7_last_error_message().is_null());
        let (mut a, mut b) = (0.0, 0.0);
        assert_eq!(spin7_form_split_norms(omega, &mut a, &mut b), Spin7Status::InvalidArgument);
        spin7_form_free(omega);

        let mut v = 0;
        assert_eq!(spin7_index_su2(1, 0, &mut v), Spin7Status::InvalidArgument);
        assert!(last_error().contains("divisible"));

        spin7_form_free(ptr::null_mut());
        spin7_field_free(ptr::null_mut());
        spin7_string_free(ptr::null_mut());
    }
}

#[test]
fn index_values() {
    unsafe {
        let mut v = 0;
        assert_eq!(spin7_index_su2(0, 0, &mut v), Spin7Status::Ok);
        assert_eq!(v, -3);
        assert_eq!(spin7_example_vdim(0, 0, &mut v), Spin7Status::Ok);
        assert_eq!(v, -3);
        assert_eq!(spin7_example_vdim(1, 0, &mut v), Spin7Status::Ok);
        assert_eq!(v, 33);
    }
}

#[test]
fn u1_solve() {
    unsafe {
        let mut a0 = ptr::null_mut();
        assert_eq!(spin7_field_random(2, 0, 4, 1e-2, &mut a0), Spin7Status::Ok);
        let mut len = 0;
        assert_eq!(spin7_field_len(a0, &mut len), Spin7Status::Ok);
        assert_eq!(len, 256 * 8);
        let mut buf = vec![0.0; len];
        assert_eq!(spin7_field_copy_data(a0, buf.as_mut_ptr(), len), Spin7Status::Ok);
        assert!(buf.iter().all(|x| x.abs() <= 1e-2) && buf.iter().any(|&x| x != 0.0));
        assert_eq!(spin7_field_copy_data(a0, buf.as_mut_ptr(), len - 1), Spin7Status::InvalidArgument);

        let (mut a, mut report) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(
            spin7_field_solve(a0, Spin7Method::GradientDescent, 5000, 1e-10, &mut a, &mut report),
            Spin7Status::Ok
        );
        let text = CStr::from_ptr(report).to_str().unwrap().to_owned();
        spin7_string_free(report);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["converged"], serde_json::json!(true));
        let mut e = 1.0;
        assert_eq!(spin7_field_energy(a, &mut e), Spin7Status::Ok);
        assert!(e.sqrt() < 1e-10);
        spin7_field_free(a);
        spin7_field_free(a0);

        let mut bad = ptr::null_mut();
        assert_eq!(spin7_field_random(7, 0, 0, 1.0, &mut bad), Spin7Status::InvalidArgument);
        assert_eq!(spin7_field_random(2, 9, 0, 1.0, &mut bad), Spin7Status::InvalidArgument);
    }
}

#[test]
fn header_declares_exports() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/spin7.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .split("extern \"C\" fn ")
        .skip(1)
        .map(|s| s.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("SPIN7_STATUS_NULL_POINTER = 1"));
}

#[test]
fn header_compiles_as_c() {
    let Ok(out) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler, skipping");
        return;
    };
    assert!(out.status.success());
    let dir = tempdir();
    let src = dir.join("use.c");
    std::fs::write(
        &src,
        "#include \"spin7.h\"\nint main(void) { Spin7Form *f = 0; return spin7_form_cayley(&f) == SPIN7_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn tempdir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("spin7-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}
