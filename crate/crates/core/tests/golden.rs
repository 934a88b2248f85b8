use fosgd::cli::{check_golden, default_golden_dir, GOLDEN_CASES};
use fosgd::codec::{self, HEADER_LEN};

#[test]
fn golden_files_match_encoder() {
    let (lines, ok) = check_golden(&default_golden_dir()).unwrap();
    assert!(ok, "{lines:#?}");
}

#[test]
fn golden_sizes() {
    for case in GOLDEN_CASES {
        let bytes = std::fs::read(default_golden_dir().join(case.file_name())).unwrap();
        let enc = codec::deserialize(&bytes).unwrap();
        let d = enc.padded_dim();
        let w = enc.config().bits_per_level() as usize;
        assert_eq!(
            bytes.len(),
            HEADER_LEN + d.div_ceil(8) + (d * w).div_ceil(8),
            "{}",
            case.name
        );
        assert_eq!(enc.dim(), case.input.len());
        assert_eq!(enc.config().k_reps(), case.k_reps);
        assert_eq!(enc.config().lambda(), case.lambda);
    }
}

#[test]
fn documented_example() {
    let bytes = std::fs::read(default_golden_dir().join("d4_k1_lambda1.bin")).unwrap();
    assert_eq!(&bytes[..5], b"FOSG\x01");
    let enc = codec::deserialize(&bytes).unwrap();
    assert_eq!(enc.basis().signs(), &[1.0, -1.0, -1.0, -1.0]);
    assert_eq!(enc.levels().levels(), &[1, 1, 1, -1]);
}
