//! Filter-weight comparison of dilated convolutions against every CASSOD
//! variant, with the 4/9 and 8/9 ratio limits.
//!
//! Run with: `cargo run --example weight_counts`

use cassod::cascade::{cassod_weight_count, conv_weight_count, CassodVariant};

fn main() {
    println!(
        "{:>6} {:>12} {:>10} {:>12} {:>12} {:>10} {:>10}",
        "C", "3x3 dilated", "CASSOD-A", "CASSOD-C(1)", "CASSOD-C(2)", "3x3 dw", "CASSOD-D"
    );
    for c in [16usize, 32, 64, 128] {
        println!(
            "{:>6} {:>12} {:>10} {:>12} {:>12} {:>10} {:>10}",
            c,
            conv_weight_count(3, c, c, false),
            cassod_weight_count(CassodVariant::A, c, c),
            cassod_weight_count(CassodVariant::CFirst, c, c),
            cassod_weight_count(CassodVariant::CSecond, c, c),
            conv_weight_count(3, c, c, true),
            cassod_weight_count(CassodVariant::D, c, c),
        );
    }

    println!("\nCASSOD-A / 3x3 dilated (C1 = C2 = C):");
    for exp in [0u32, 2, 4, 6, 8, 10, 12] {
        let c = 1usize << exp;
        let ratio = cassod_weight_count(CassodVariant::A, c, c) as f64
            / conv_weight_count(3, c, c, false) as f64;
        println!("  C = {c:>5}: {ratio:.6}");
    }
    println!("  limit:     {:.6} (4/9)", 4.0 / 9.0);

    let c = 64;
    let ratio_c = cassod_weight_count(CassodVariant::CFirst, c, c) as f64
        / conv_weight_count(3, c, c, false) as f64;
    let ratio_d = cassod_weight_count(CassodVariant::D, c, c) as f64
        / conv_weight_count(3, c, c, true) as f64;
    println!("\nCASSOD-C / 3x3 dilated at C1 = C2: {ratio_c:.6} (8/9 exactly)");
    println!("CASSOD-D / 3x3 depthwise dilated:  {ratio_d:.6} (8/9 exactly)");
}
