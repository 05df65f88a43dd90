use depsketch::formats::csv::{paths, read_vectors, report_long, table};
use depsketch::formats::{
    format_f64, load_toml, parse_dag, parse_f64, parse_matrices, parse_operator, parse_query, to_toml, write_dag,
    write_matrices, write_operator, FloatStyle,
};
use depsketch_core::complexity::MatrixSetDescriptor;
use depsketch_core::graph::{build_gm_template, Family};
use depsketch_core::processes::{sample_with_tangent_at, ConditionalLaw, ProcessConfig};
use depsketch_core::transforms::{build_countsketch, build_jl, build_toeplitz, CountSketchPattern};
use depsketch_core::processes::DependentMatrixConfig;
use depsketch_core::verify::{Series, TrialReport};
use depsketch_core::Matrix;
use proptest::prelude::*;

#[test]
fn dag_text_roundtrip_and_comments() {
    let text = "# latent chain\nF0 -> F1 -> F2\nF1 -> xi1  # observation\nF2 -> xi2\nlonely\n";
    let dag = parse_dag(text).unwrap();
    assert_eq!(dag.len(), 6);
    let again = parse_dag(&write_dag(&dag)).unwrap();
    assert_eq!(again.edges(), dag.edges());
    assert_eq!(again.len(), dag.len());

    let tpl = build_gm_template(Family::Gm2, 4, true).unwrap();
    assert_eq!(parse_dag(&write_dag(&tpl)).unwrap().edges(), tpl.edges());
}

#[test]
fn dag_parse_errors() {
    assert!(parse_dag("a -> \n").is_err());
    assert!(parse_dag("a b -> c\n").is_err());
    assert!(parse_dag("a -> b\nb -> a\n").is_err());
}

#[test]
fn query_format() {
    let q = parse_query("xi1, xi2 ; xi3 | F0,F1").unwrap();
    assert_eq!(q.x, ["xi1", "xi2"]);
    assert_eq!(q.y, ["xi3"]);
    assert_eq!(q.z, ["F0", "F1"]);
    let q = parse_query("a;b").unwrap();
    assert!(q.z.is_empty());
    assert!(parse_query("a | b").is_err());
    assert!(parse_query(" ; b | c").is_err());

    let dag = parse_dag("a -> c\nb -> c\n").unwrap();
    assert!(dag.d_separated(&parse_query("a ; b").unwrap()).unwrap());
    assert!(!dag.d_separated(&parse_query("a ; b | c").unwrap()).unwrap());
}

#[test]
fn hex_float_known_values() {
    assert_eq!(format_f64(1.0, FloatStyle::Hex), "0x1p+0");
    assert_eq!(format_f64(3.0, FloatStyle::Hex), "0x1.8p+1");
    assert_eq!(format_f64(-0.5, FloatStyle::Hex), "-0x1p-1");
    assert_eq!(format_f64(0.0, FloatStyle::Hex), "0x0p+0");
    assert_eq!(parse_f64("0x1.8p+1").unwrap(), 3.0);
    assert_eq!(parse_f64("0x0.0000000000001p-1022").unwrap(), f64::from_bits(1));
    assert_eq!(parse_f64("-inf").unwrap(), f64::NEG_INFINITY);
    assert!(parse_f64("0x1.zp0").is_err());
    assert!(parse_f64("abc").is_err());
}

proptest! {
    #[test]
    fn floats_roundtrip_in_both_styles(bits in any::<u64>()) {
        let x = f64::from_bits(bits);
        prop_assume!(!x.is_nan());
        for style in [FloatStyle::Decimal, FloatStyle::Hex] {
            let back = parse_f64(&format_f64(x, style)).unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}

#[test]
fn operators_roundtrip_losslessly() {
    let ops = [
        build_jl(5, 7, &DependentMatrixConfig::shape_modulated(5, 7, 0.9, 0.5), 3).unwrap(),
        build_toeplitz((0..9).map(|i| (i as f64 * 0.37).sin()).collect(), vec![0, 2, 3]).unwrap(),
        build_countsketch(6, 10, 2, CountSketchPattern::Adaptive, 11).unwrap(),
    ];
    for op in &ops {
        for style in [FloatStyle::Decimal, FloatStyle::Hex] {
            let text = write_operator(op, style);
            assert_eq!(&parse_operator(&text).unwrap(), op, "{text}");
        }
    }
}

#[test]
fn operator_parse_rejects_bad_input() {
    assert!(parse_operator("kind circulant\n").is_err());
    assert!(parse_operator("kind dense\nscale 1\nshape 2 2\nrow 1 2\n").is_err());
    // Column with a repeated row fails validation.
    assert!(parse_operator("kind countsketch\nn 3\np 1\nd 2\ncol 0 1:1 1:-1\n").is_err());
    assert!(parse_operator("kind dense\nscale 1\nshape 1 1\nrow 1\nextra 2\n").is_err());
}

#[test]
fn matrix_lists_roundtrip() {
    let ms = vec![Matrix::identity(3), Matrix::from_rows(&[vec![0.1, -2.5e-300], vec![1e20, 0.0]]).unwrap()];
    let text = write_matrices(&ms, FloatStyle::Decimal);
    assert_eq!(parse_matrices(&text).unwrap(), ms);
    assert!(parse_matrices("matrix 2 2\n1 2\n").is_err());
    assert!(parse_matrices("matrix 1 2\n1 2 3\n").is_err());
    assert!(parse_matrices("# empty\n").is_err());
}

#[test]
fn process_config_toml_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    for cfg in [
        ProcessConfig::gm1(5),
        ProcessConfig::gm3(4),
        ProcessConfig::gm3_feedback(3, ConditionalLaw::Gaussian, 0.7, 0.5, 0.5),
        ProcessConfig::iid(2).with_law(ConditionalLaw::bernoulli(0.3)).uncentered(),
    ] {
        let path = dir.path().join("p.toml");
        std::fs::write(&path, to_toml(&cfg).unwrap()).unwrap();
        let back: ProcessConfig = load_toml(&path).unwrap();
        assert_eq!(back, cfg);
    }
    let path = dir.path().join("set.toml");
    let set = MatrixSetDescriptor::toeplitz_band(3, 5, 2);
    std::fs::write(&path, to_toml(&set).unwrap()).unwrap();
    assert_eq!(load_toml::<MatrixSetDescriptor>(&path).unwrap(), set);
}

#[test]
fn documented_process_schema_parses() {
    let text = r#"
family = "gm2"
n = 4
varrho = "identity"
subgaussian_l = 2.0
modulated = true
centered = true

[law]
kind = "discrete"
support = [-1.0, 1.0]
probs = [0.5, 0.5]

[latent]
kind = "ar1"
rho = 0.5
"#;
    let cfg: ProcessConfig = toml::from_str(text).unwrap();
    cfg.validate().unwrap();
    assert_eq!(cfg.n, 4);
}

#[test]
fn csv_quoting_and_path_columns() {
    let bytes = table(&["name", "value"], vec![vec!["a,b", "1"], vec!["say \"hi\"", "2"]]).unwrap();
    let text = String::from_utf8(bytes).unwrap();
    assert_eq!(text, "name,value\r\n\"a,b\",1\r\n\"say \"\"hi\"\"\",2\r\n");

    let cfg = ProcessConfig::gm1(3);
    let p = sample_with_tangent_at(&cfg, 5, 0).unwrap();
    let text = String::from_utf8(paths(std::slice::from_ref(&p)).unwrap()).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["path", "index", "latent", "xi", "tangent"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    // Prior row plus one row per coordinate.
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0][3].len(), 0);
    let xi2: f64 = rows[2][3].parse().unwrap();
    assert_eq!(xi2, p.xi[1]);
}

#[test]
fn long_report_format() {
    let mut r = TrialReport::new("demo", 3, 1);
    r.push_series(Series::new("x", vec![1.0, 2.5, -3.0]));
    r.push_series(Series::summary_only("y", &[1.0, 3.0]));
    let text = String::from_utf8(report_long(&[&r]).unwrap()).unwrap();
    assert_eq!(text, "quantity,trial,value\r\nx,0,1\r\nx,1,2.5\r\nx,2,-3\r\ny,,2\r\n");
}

#[test]
fn vectors_from_csv() {
    let v = read_vectors("1, 2,3\n0x1p-1,-4,5e-1\n").unwrap();
    assert_eq!(v, vec![vec![1.0, 2.0, 3.0], vec![0.5, -4.0, 0.5]]);
    assert!(read_vectors("1,x\n").is_err());
}
