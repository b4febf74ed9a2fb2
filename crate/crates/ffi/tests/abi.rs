use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use flexgrid_ffi::*;

fn build(points: &[f64], dims: usize, variant: FlexgridVariant) -> *mut FlexgridIndex {
    let mut h = ptr::null_mut();
    let st = unsafe {
        flexgrid_build(
            dims,
            points.as_ptr(),
            points.len() / dims,
            0,
            ptr::null(),
            variant,
            8,
            &mut h,
        )
    };
    assert_eq!(st, FlexgridStatus::Ok);
    assert!(!h.is_null());
    h
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(flexgrid_last_error()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn lifecycle() {
    let pts: Vec<f64> = (0..100)
        .flat_map(|i| [i as f64, (i * 7 % 13) as f64])
        .collect();
    for variant in [
        FlexgridVariant::Flexflood,
        FlexgridVariant::UpdatableFlood,
        FlexgridVariant::DeltaBuffer,
    ] {
        let h = build(&pts, 2, variant);
        let mut flag = false;
        unsafe {
            assert_eq!(
                flexgrid_insert(h, [500.0, 1.0].as_ptr(), &mut flag),
                FlexgridStatus::Ok
            );
            assert!(flag);
            assert_eq!(
                flexgrid_insert(h, [500.0, 1.0].as_ptr(), &mut flag),
                FlexgridStatus::Ok
            );
            assert!(!flag);
            assert_eq!(
                flexgrid_contains(h, [500.0, 1.0].as_ptr(), &mut flag),
                FlexgridStatus::Ok
            );
            assert!(flag);
            assert_eq!(
                flexgrid_erase(h, [0.0, 0.0].as_ptr(), &mut flag),
                FlexgridStatus::Ok
            );
            assert!(flag);
            let mut len = 0;
            assert_eq!(flexgrid_len(h, &mut len), FlexgridStatus::Ok);
            assert_eq!(len, 100);

            let (lo, hi) = ([10.0, 0.0], [19.0, 12.0]);
            let mut count = 0;
            assert_eq!(
                flexgrid_search(h, lo.as_ptr(), hi.as_ptr(), ptr::null_mut(), 0, &mut count),
                FlexgridStatus::BufferTooSmall
            );
            assert_eq!(count, 10);
            let mut buf = vec![0.0; count * 2];
            assert_eq!(
                flexgrid_search(
                    h,
                    lo.as_ptr(),
                    hi.as_ptr(),
                    buf.as_mut_ptr(),
                    count,
                    &mut count
                ),
                FlexgridStatus::Ok
            );
            let mut xs: Vec<f64> = buf.chunks(2).map(|p| p[0]).collect();
            xs.sort_by(f64::total_cmp);
            assert_eq!(xs, (10..20).map(|i| i as f64).collect::<Vec<_>>());

            let mut n = 0;
            assert_eq!(flexgrid_slab_count(h, 1, &mut n), FlexgridStatus::Ok);
            assert!(n >= 1);
            assert_eq!(flexgrid_event_count(h, &mut n), FlexgridStatus::Ok);
            flexgrid_free(h);
        }
    }
}

#[test]
fn error_codes() {
    let h = build(&[1.0, 2.0, 3.0, 4.0], 2, FlexgridVariant::Flexflood);
    let mut flag = false;
    unsafe {
        assert_eq!(
            flexgrid_insert(h, [f64::NAN, 0.0].as_ptr(), &mut flag),
            FlexgridStatus::NonFinite
        );
        assert!(last_error().contains("non-finite"));
        assert_eq!(
            flexgrid_insert(ptr::null_mut(), [0.0, 0.0].as_ptr(), &mut flag),
            FlexgridStatus::NullPointer
        );
        assert_eq!(
            flexgrid_insert(h, ptr::null(), &mut flag),
            FlexgridStatus::NullPointer
        );
        let mut count = 0;
        assert_eq!(
            flexgrid_search(
                h,
                [1.0, 1.0].as_ptr(),
                [0.0, 2.0].as_ptr(),
                ptr::null_mut(),
                0,
                &mut count
            ),
            FlexgridStatus::InvalidArgument
        );
        let mut n = 0;
        assert_eq!(
            flexgrid_slab_count(h, 5, &mut n),
            FlexgridStatus::InvalidArgument
        );
        flexgrid_free(h);
        flexgrid_free(ptr::null_mut());

        let mut out = ptr::null_mut();
        let counts = [4usize, 4];
        assert_eq!(
            flexgrid_build(
                2,
                [0.0, 0.0].as_ptr(),
                1,
                3,
                counts.as_ptr(),
                FlexgridVariant::Flexflood,
                1,
                &mut out
            ),
            FlexgridStatus::InvalidArgument
        );
        assert!(out.is_null());
        assert_eq!(
            flexgrid_build(
                1,
                ptr::null(),
                0,
                0,
                ptr::null(),
                FlexgridVariant::Flexflood,
                1,
                &mut out
            ),
            FlexgridStatus::InvalidArgument
        );
        assert_eq!(
            flexgrid_build(
                2,
                ptr::null(),
                0,
                0,
                ptr::null(),
                FlexgridVariant::DeltaBuffer,
                0,
                &mut out
            ),
            FlexgridStatus::InvalidArgument
        );
    }
}

#[test]
fn empty_build_then_insert() {
    let mut h = ptr::null_mut();
    unsafe {
        assert_eq!(
            flexgrid_build(
                3,
                ptr::null(),
                0,
                0,
                ptr::null(),
                FlexgridVariant::Flexflood,
                1,
                &mut h
            ),
            FlexgridStatus::Ok
        );
        for i in 0..50 {
            assert_eq!(
                flexgrid_insert(h, [i as f64, 0.0, 1.0].as_ptr(), ptr::null_mut()),
                FlexgridStatus::Ok
            );
        }
        let mut len = 0;
        flexgrid_len(h, &mut len);
        assert_eq!(len, 50);
        flexgrid_free(h);
    }
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/flexgrid.h");
    assert!(header.exists());
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "flexgrid_build",
        "flexgrid_search",
        "flexgrid_free",
        "FLEXGRID_STATUS_BUFFER_TOO_SMALL",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let Ok(status) = Command::new("cc")
        .args(["-fsyntax-only", "-xc"])
        .arg(&header)
        .status()
    else {
        eprintln!("cc not available; skipping C syntax check");
        return;
    };
    assert!(status.success());
}
