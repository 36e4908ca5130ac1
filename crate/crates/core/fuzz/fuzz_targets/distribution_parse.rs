#![no_main]

use libfuzzer_sys::fuzz_target;
use targeting_value::dist::Interval;
use targeting_value::Distribution;

fuzz_target!(|data: &[u8]| {
    let Ok(d) = serde_json::from_slice::<Distribution>(data) else {
        return;
    };
    // A law that validated must behave like one.
    let (lo, hi) = d.effective_support();
    assert!(lo <= hi);
    let m = d.mass(Interval::whole());
    assert!((m - 1.0).abs() < 1e-9, "mass {m}");
    for x in [lo, 0.5 * (lo + hi), hi] {
        let c = d.cdf(x);
        assert!((0.0..=1.0 + 1e-12).contains(&c), "cdf {c}");
    }
    let text = serde_json::to_string(&d).expect("serializes");
    let back: Distribution = serde_json::from_str(&text).expect("round trips");
    assert_eq!(back, d);
});
