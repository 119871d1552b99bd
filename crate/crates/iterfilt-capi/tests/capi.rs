//! Exercises the C surface the way a foreign caller would: raw pointers,
//! status codes, and explicit destroy calls.

use std::ffi::CStr;
use std::fs;
use std::path::Path;
use std::ptr;

use iterfilt_capi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(iterfilt_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn full_round_trip_through_the_c_surface() {
    unsafe {
        let mut signal: *mut IterfiltSignal = ptr::null_mut();
        let status = iterfilt_signal_two_tone(1.0, 0.5, 3.0, 100.0, 20.0, &mut signal);
        assert_eq!(status, IterfiltStatus::Ok);

        let mut len = 0usize;
        assert_eq!(iterfilt_signal_len(signal, &mut len), IterfiltStatus::Ok);
        assert_eq!(len, 2000);
        let mut rate = 0.0f64;
        assert_eq!(
            iterfilt_signal_sample_rate(signal, &mut rate),
            IterfiltStatus::Ok
        );
        assert_eq!(rate, 20.0);

        let mut config: *mut IterfiltConfig = ptr::null_mut();
        assert_eq!(iterfilt_config_standard(&mut config), IterfiltStatus::Ok);
        assert_eq!(
            iterfilt_config_set_mask_ideal(config, 1.0),
            IterfiltStatus::Ok
        );
        assert_eq!(
            iterfilt_config_set_mode(config, IterfiltMode::Projection),
            IterfiltStatus::Ok
        );

        let mut decomposition: *mut IterfiltDecomposition = ptr::null_mut();
        assert_eq!(
            iterfilt_decompose(signal, config, &mut decomposition),
            IterfiltStatus::Ok
        );

        let mut count = 0usize;
        assert_eq!(
            iterfilt_decomposition_component_count(decomposition, &mut count),
            IterfiltStatus::Ok
        );
        assert_eq!(count, 2, "fast tone, slow tone");

        let mut stop = IterfiltStop::ComponentCap;
        assert_eq!(
            iterfilt_decomposition_stop(decomposition, &mut stop),
            IterfiltStatus::Ok
        );
        assert_eq!(stop, IterfiltStop::NormFloor);

        let mut first: *mut IterfiltSignal = ptr::null_mut();
        assert_eq!(
            iterfilt_decomposition_component(decomposition, 0, &mut first),
            IterfiltStatus::Ok
        );
        let mut c1 = f64::NAN;
        assert_eq!(
            iterfilt_c1_metric(first, 1.0, 0.5, 3.0, 100.0, 20.0, &mut c1),
            IterfiltStatus::Ok
        );
        assert!(c1 < 1e-8, "c1 = {c1:.3e}");

        let mut iterations = u64::MAX;
        assert_eq!(
            iterfilt_decomposition_component_iterations(decomposition, 0, &mut iterations),
            IterfiltStatus::Ok
        );
        assert_eq!(iterations, 0, "projection mode applies no stepwise updates");

        // Reconstruction through the borrowed buffers.
        let mut second: *mut IterfiltSignal = ptr::null_mut();
        assert_eq!(
            iterfilt_decomposition_component(decomposition, 1, &mut second),
            IterfiltStatus::Ok
        );
        let mut remainder: *mut IterfiltSignal = ptr::null_mut();
        assert_eq!(
            iterfilt_decomposition_remainder(decomposition, &mut remainder),
            IterfiltStatus::Ok
        );
        let mut input_ptr: *const f64 = ptr::null();
        let mut n = 0usize;
        assert_eq!(
            iterfilt_signal_data(signal, &mut input_ptr, &mut n),
            IterfiltStatus::Ok
        );
        let parts: Vec<&[f64]> = [first, second, remainder]
            .iter()
            .map(|&handle| {
                let mut p: *const f64 = ptr::null();
                let mut m = 0usize;
                assert_eq!(
                    iterfilt_signal_data(handle, &mut p, &mut m),
                    IterfiltStatus::Ok
                );
                assert_eq!(m, n);
                std::slice::from_raw_parts(p, m)
            })
            .collect();
        let input = std::slice::from_raw_parts(input_ptr, n);
        let mut worst = 0.0f64;
        for i in 0..n {
            let sum: f64 = parts.iter().map(|part| part[i]).sum();
            worst = worst.max((sum - input[i]).abs());
        }
        assert!(worst < 1e-10, "reconstruction error {worst:.3e}");

        iterfilt_signal_destroy(first);
        iterfilt_signal_destroy(second);
        iterfilt_signal_destroy(remainder);
        iterfilt_decomposition_destroy(decomposition);
        iterfilt_config_destroy(config);
        iterfilt_signal_destroy(signal);
    }
}

#[test]
fn failures_set_status_and_message() {
    unsafe {
        // Null argument.
        let mut len = 0usize;
        assert_eq!(
            iterfilt_signal_len(ptr::null(), &mut len),
            IterfiltStatus::NullPointer
        );
        assert!(last_error().contains("null"), "{}", last_error());

        // Out-of-range two-tone frequency.
        let mut signal: *mut IterfiltSignal = ptr::null_mut();
        assert_eq!(
            iterfilt_signal_two_tone(1.0, 1.5, 0.0, 100.0, 20.0, &mut signal),
            IterfiltStatus::InvalidArgument
        );
        assert!(last_error().contains("frequency"), "{}", last_error());
        assert!(signal.is_null());

        // Non-finite samples.
        let bad = [0.0, f64::NAN, 1.0];
        assert_eq!(
            iterfilt_signal_create(bad.as_ptr(), bad.len(), 1.0, &mut signal),
            IterfiltStatus::InvalidArgument
        );

        // An unattainable pinned zero surfaces as a computation failure.
        assert_eq!(
            iterfilt_signal_two_tone(1.0, 0.5, 3.0, 100.0, 20.0, &mut signal),
            IterfiltStatus::Ok
        );
        let mut config: *mut IterfiltConfig = ptr::null_mut();
        assert_eq!(iterfilt_config_standard(&mut config), IterfiltStatus::Ok);
        assert_eq!(
            iterfilt_config_set_mask_ideal(config, 0.82),
            IterfiltStatus::Ok
        );
        let mut decomposition: *mut IterfiltDecomposition = ptr::null_mut();
        assert_eq!(
            iterfilt_decompose(signal, config, &mut decomposition),
            IterfiltStatus::ComputeFailed
        );
        assert!(!last_error().is_empty());

        // Index out of range on a real decomposition.
        assert_eq!(
            iterfilt_config_set_mask_ideal(config, 1.0),
            IterfiltStatus::Ok
        );
        assert_eq!(
            iterfilt_decompose(signal, config, &mut decomposition),
            IterfiltStatus::Ok
        );
        let mut component: *mut IterfiltSignal = ptr::null_mut();
        assert_eq!(
            iterfilt_decomposition_component(decomposition, 99, &mut component),
            IterfiltStatus::IndexOutOfRange
        );
        assert!(last_error().contains("99"), "{}", last_error());

        iterfilt_decomposition_destroy(decomposition);
        iterfilt_config_destroy(config);
        iterfilt_signal_destroy(signal);

        // Destroy tolerates null.
        iterfilt_signal_destroy(ptr::null_mut());
        iterfilt_config_destroy(ptr::null_mut());
        iterfilt_decomposition_destroy(ptr::null_mut());
    }
}

#[test]
fn version_is_a_readable_c_string() {
    let version = unsafe { CStr::from_ptr(iterfilt_version()) }
        .to_str()
        .unwrap();
    assert!(version.contains('.'), "{version}");
}

#[test]
fn generated_header_covers_the_surface() {
    let header_path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("include")
        .join("iterfilt.h");
    let header = fs::read_to_string(header_path).unwrap();
    for needle in [
        "typedef struct IterfiltSignal IterfiltSignal;",
        "typedef struct IterfiltConfig IterfiltConfig;",
        "typedef struct IterfiltDecomposition IterfiltDecomposition;",
        "iterfilt_decompose",
        "iterfilt_c1_metric",
        "iterfilt_last_error_message",
        "ITERFILT_STATUS_OK = 0",
    ] {
        assert!(header.contains(needle), "header misses {needle:?}");
    }
}
