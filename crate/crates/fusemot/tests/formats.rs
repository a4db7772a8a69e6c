use fusemot::formats::mot::{format_mot, parse_mot, MotRecord};
use fusemot::formats::pgm::{decode_depth, encode_depth};
use fusemot::formats::track3d::{format_track3d, parse_track3d, Track3DRecord};
use fusemot::formats::FormatError;
use fusemot_core::depth_lift::DepthMap;
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![any::<i32>().prop_map(f64::from), -1e6..1e6f64, prop::num::f64::NORMAL]
}

fn positive() -> impl Strategy<Value = f64> {
    prop_oneof![1e-6..1e4f64, prop::num::f64::POSITIVE.prop_filter("finite", |x| x.is_finite() && *x > 0.0)]
}

prop_compose! {
    fn mot_record()(frame in 1u32..1_000_000, id in -1i64..1_000_000,
                    l in finite(), t in finite(), w in positive(), h in positive(),
                    conf in finite(), x in finite(), y in finite(), z in finite()) -> MotRecord {
        MotRecord { frame, id, bb_left: l, bb_top: t, bb_width: w, bb_height: h, conf, x, y, z }
    }
}

prop_compose! {
    fn trk_record()(frame in 0u32..1_000_000, id in any::<u64>(),
                    x in finite(), y in finite(), z in finite(),
                    w in positive(), h in positive(), d in positive(),
                    yaw in finite(), conf in finite(), tracker in "[a-z][a-z0-9_]{0,8}") -> Track3DRecord {
        Track3DRecord { frame, id, x, y, z, w, h, d, yaw, conf, tracker_id: tracker }
    }
}

proptest! {
    #[test]
    fn mot_round_trip(records in prop::collection::vec(mot_record(), 0..40)) {
        let text = format_mot(&records);
        let back = parse_mot(&text).unwrap();
        prop_assert_eq!(&back, &records);
        prop_assert_eq!(format_mot(&back), text);
    }

    #[test]
    fn track3d_round_trip(records in prop::collection::vec(trk_record(), 0..40)) {
        let text = format_track3d(&records);
        let back = parse_track3d(&text).unwrap();
        prop_assert_eq!(&back, &records);
        prop_assert_eq!(format_track3d(&back), text);
    }

    #[test]
    fn pgm_round_trip(w in 1u32..24, h in 1u32..24, seed in any::<u64>()) {
        let mm: Vec<u16> = (0..w * h).map(|i| (seed.rotate_left(i % 64) ^ u64::from(i)) as u16).collect();
        let map = DepthMap::from_millimeters(w, h, &mm).unwrap();
        let bytes = encode_depth(&map);
        let back = decode_depth(&bytes).unwrap();
        prop_assert_eq!(back.to_millimeters(), mm);
        prop_assert_eq!(encode_depth(&back), bytes);
    }
}

#[test]
fn mot_reports_line_of_bad_field() {
    let err = parse_mot("1,2,0,0,10,10,1,-1,-1,-1\n2,3,0,0,ten,10,1,-1,-1,-1\n").unwrap_err();
    match err {
        FormatError::Parse { line, .. } => assert_eq!(line, 2),
        other => panic!("unexpected error {other}"),
    }
}

#[test]
fn mot_rejects_short_lines() {
    assert!(matches!(parse_mot("1,2,0,0\n"), Err(FormatError::Parse { line: 1, .. })));
}

#[test]
fn pgm_rejects_wrong_magic_and_truncation() {
    let map = DepthMap::from_millimeters(3, 2, &[1, 2, 3, 4, 5, 6]).unwrap();
    let mut bytes = encode_depth(&map);
    bytes[1] = b'2';
    assert!(matches!(decode_depth(&bytes), Err(FormatError::BadMagic { .. })));
    let bytes = encode_depth(&map);
    assert!(matches!(decode_depth(&bytes[..bytes.len() - 1]), Err(FormatError::TruncatedFile { .. })));
}
