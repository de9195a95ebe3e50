use fftntt::butterfly::{self, dsa_butterfly_raw, kem_butterfly_raw, Operands, Outputs};
use fftntt::engine;
use fftntt::fixed_point::{
    self, add32_split, karatsuba32, quantize_product, signed_mul32, sub32_split, Signedness,
    TwiddleComplex,
};
use fftntt::memory::{bit_reverse_load_with, pack_with, unpack, BankMap};
use fftntt::modring::barrett_reduce;
use fftntt::reference::naive_ntt;
use fftntt::{FixedComplex, Mode, Modulus, Polynomial, Signal, Q16_15, Q1_30};
use proptest::prelude::*;

fn poly(modulus: Modulus) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec(0..modulus.q(), 256)
        .prop_map(move |c| Polynomial::new(modulus, c).unwrap())
}

fn any_modulus() -> impl Strategy<Value = Modulus> {
    prop_oneof![Just(Modulus::Kyber), Just(Modulus::Dilithium)]
}

fn sample() -> impl Strategy<Value = FixedComplex> {
    (-32768i32..=32768, -32768i32..=32768)
        .prop_map(|(re, im)| FixedComplex::new(Q16_15(re), Q16_15(im)))
}

fn twiddle() -> impl Strategy<Value = TwiddleComplex> {
    (-(1i32 << 30)..=(1 << 30), -(1i32 << 30)..=(1 << 30))
        .prop_map(|(re, im)| TwiddleComplex::new(Q1_30(re), Q1_30(im)))
}

proptest! {
    #[test]
    fn karatsuba_is_exact_with_three_multiplies(a: u32, b: u32) {
        let before = fixed_point::counters();
        prop_assert_eq!(karatsuba32(a, b), u64::from(a) * u64::from(b));
        let used = fixed_point::counters() - before;
        prop_assert_eq!(used.mul16, 3);
        prop_assert_eq!(used.karatsuba32, 1);
    }

    #[test]
    fn signed_multiply_is_exact(a: i32, b: i32) {
        prop_assert_eq!(signed_mul32(a, b), i64::from(a) * i64::from(b));
    }

    #[test]
    fn split_adders_match_native(a: u32, b: u32) {
        let add = add32_split(a, b, Signedness::Unsigned);
        prop_assert_eq!(add.value, a.wrapping_add(b));
        prop_assert_eq!(add.overflow, a.checked_add(b).is_none());
        prop_assert_eq!(add32_split(a, b, Signedness::Signed).overflow,
            (a as i32).checked_add(b as i32).is_none());

        let sub = sub32_split(a, b, Signedness::Unsigned);
        prop_assert_eq!(sub.value, a.wrapping_sub(b));
        prop_assert_eq!(sub.overflow, a < b);
        prop_assert_eq!(sub32_split(a, b, Signedness::Signed).overflow,
            (a as i32).checked_sub(b as i32).is_none());
    }

    #[test]
    fn quantize_is_floor_and_monotone(x in -(1i64 << 45)..(1i64 << 45), d in 0i64..(1 << 32)) {
        let q = quantize_product(x).0;
        prop_assert_eq!(i64::from(q), x.div_euclid(1 << 30));
        prop_assert!(quantize_product(x + d).0 >= q);
    }

    #[test]
    fn barrett_matches_remainder(m in any_modulus(), x: u64) {
        let bits = 2 * m.config().width;
        let x = x & ((1u64 << bits) - 1);
        prop_assert_eq!(barrett_reduce(x, m).unwrap().value() as u64, x % u64::from(m.q()));
    }

    #[test]
    fn barrett_rejects_wide_inputs(m in any_modulus(), extra in 0u64..1000) {
        let x = (1u64 << (2 * m.config().width)) + extra;
        prop_assert!(barrett_reduce(x, m).is_err());
    }

    #[test]
    fn ntt_butterflies_match_native(a in 0u32..8_380_417, b in 0u32..8_380_417, z in 0u32..8_380_417) {
        let q = 8_380_417u64;
        let t = u64::from(z) * u64::from(b) % q;
        let (s, d) = dsa_butterfly_raw(a, b, z);
        prop_assert_eq!(u64::from(s), (u64::from(a) + t) % q);
        prop_assert_eq!(u64::from(d), (u64::from(a) + q - t) % q);

        let (a, b, z) = (a % 3329, b % 3329, z % 3329);
        let t = z * b % 3329;
        prop_assert_eq!(kem_butterfly_raw(a, b, z), ((a + t) % 3329, (a + 3329 - t) % 3329));
    }

    #[test]
    fn fft_butterfly_matches_wide_arithmetic(a in sample(), b in sample(), w in twiddle()) {
        let (sum, diff) = butterfly::fft_butterfly(a, b, w);
        let q = |x: i64| (x >> 30) as i32;
        let t_re = q(i64::from(w.re.0) * i64::from(b.re.0)).wrapping_sub(q(i64::from(w.im.0) * i64::from(b.im.0)));
        let t_im = q(i64::from(w.re.0) * i64::from(b.im.0)).wrapping_add(q(i64::from(w.im.0) * i64::from(b.re.0)));
        prop_assert_eq!(sum, FixedComplex::new(Q16_15(a.re.0.wrapping_add(t_re)), Q16_15(a.im.0.wrapping_add(t_im))));
        prop_assert_eq!(diff, FixedComplex::new(Q16_15(a.re.0.wrapping_sub(t_re)), Q16_15(a.im.0.wrapping_sub(t_im))));
    }

    #[test]
    fn lane_path_matches_typed_path(a in sample(), b in sample(), w in twiddle(),
                                    kem in prop::array::uniform4((0u32..3329, 0u32..3329, 0u32..3329)),
                                    dsa in prop::array::uniform2((0u32..8_380_417, 0u32..8_380_417, 0u32..8_380_417))) {
        for ops in [Operands::Fft { a, b, w }, Operands::MlKem(kem), Operands::MlDsa(dsa)] {
            let mode = ops.mode();
            let bundle = ops.pack();
            prop_assert_eq!(Operands::unpack(mode, &bundle).unwrap(), ops);
            let out = butterfly::issue(mode, &bundle).unwrap();
            let (want, overflow) = butterfly::execute(&ops);
            prop_assert_eq!(Outputs::unpack(mode, &out.lanes), want);
            prop_assert_eq!(out.overflow, overflow);
        }
    }

    #[test]
    fn pack_unpack_round_trip(p in any_modulus().prop_flat_map(poly),
                              x in prop::collection::vec(sample(), 512)) {
        let mode = engine::mode_for(p.modulus());
        for map in [BankMap::Skewed, BankMap::Interleaved] {
            let signal = Signal::Poly(p.clone());
            prop_assert_eq!(unpack(mode, &pack_with(mode, &signal, map).unwrap()).unwrap(), signal);
            let signal = Signal::Complex(x.clone());
            prop_assert_eq!(unpack(Mode::Fft, &pack_with(Mode::Fft, &signal, map).unwrap()).unwrap(), signal);
            let image = bit_reverse_load_with(&x, map).unwrap();
            prop_assert_eq!(image.remapped(BankMap::Skewed), bit_reverse_load_with(&x, BankMap::Skewed).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn engine_ntt_matches_oracle(p in any_modulus().prop_flat_map(poly)) {
        let (hat, report) = engine::ntt(&p).unwrap();
        prop_assert_eq!(report.port_conflicts, 0);
        prop_assert_eq!(hat, naive_ntt(&p));
    }

    #[test]
    fn inverse_undoes_forward(p in any_modulus().prop_flat_map(poly)) {
        let mode = engine::mode_for(p.modulus());
        let image = fftntt::memory::pack(mode, &Signal::Poly(p.clone())).unwrap();
        let (forward, _) = engine::run(mode, image, &fftntt::twiddle::rom_for(mode)).unwrap();
        let back = engine::inverse_ntt(mode, &forward).unwrap();
        prop_assert_eq!(unpack(mode, &back).unwrap(), Signal::Poly(p));
    }

    #[test]
    fn fft_is_nearly_linear(x in prop::collection::vec(sample(), 512), y in prop::collection::vec(sample(), 512)) {
        // halve inputs so the sum stays inside [-1, 1]
        let half = |v: &[FixedComplex]| -> Vec<FixedComplex> {
            v.iter().map(|c| FixedComplex::new(Q16_15(c.re.0 >> 1), Q16_15(c.im.0 >> 1))).collect()
        };
        let (x, y) = (half(&x), half(&y));
        let sum: Vec<FixedComplex> = x.iter().zip(&y)
            .map(|(a, b)| FixedComplex::new(Q16_15(a.re.0 + b.re.0), Q16_15(a.im.0 + b.im.0)))
            .collect();
        let (fx, _) = engine::fft(&x).unwrap();
        let (fy, _) = engine::fft(&y).unwrap();
        let (fs, _) = engine::fft(&sum).unwrap();
        for k in 0..512 {
            let (a, b, s) = (fx[k].to_f64(), fy[k].to_f64(), fs[k].to_f64());
            prop_assert!((a.0 + b.0 - s.0).abs() <= 3.0 * 0.032);
            prop_assert!((a.1 + b.1 - s.1).abs() <= 3.0 * 0.032);
        }
    }
}
