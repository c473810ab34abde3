//! Step-1e-3 grid oracle for the EIP:DIA sum-rate at t = 4, ℓ = 3.
//!
//! Writes 3 and 4 are solved in closed form: the last write and the
//! odd-parity half of write 3 are best at 1/2, and the even-parity
//! probability of write 3 maximizes `a·h(p) − b·p`, whose maximum is
//! `a·log₂(1 + 2^(−b/a))`. The grid covers `(p_{1,0}, p_{2,0}, p_{2,1})`
//! over the profile domain `[0, 1/2]³`.
//!
//! Usage: `cargo run --release -p elm-core --example grid_oracle > out.json`

fn h(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
    }
}

fn total(p10: f64, p20: f64, p21: f64) -> (f64, f64) {
    let (q10, q11) = (1.0 - p10, p10);
    let r1 = h(p10);
    let r2 = q10 * h(p20) + q11 * h(p21);
    let q20 = q10 * (1.0 - p20);
    let q21 = q10 * p20 + q11 * (1.0 - p21);
    let q22 = q11 * p21;
    let even = q20 + q22;
    // Write 3: odd cells at 1/2 contribute q21; write 4 sees 1 − Q_{3,3}.
    let (inner, p30) = if even > 0.0 {
        let p = 1.0 / (1.0 + (q22 / even).exp2());
        (even * (1.0 + (-q22 / even).exp2()).log2(), p)
    } else {
        (0.0, 0.5)
    };
    (r1 + r2 + q21 + 1.0 + inner, p30)
}

fn main() {
    let steps = 1000usize;
    let last = steps / 2;
    let hs: Vec<f64> = (0..=last).map(|i| h(i as f64 / steps as f64)).collect();
    let mut best = (f64::NEG_INFINITY, 0usize, 0usize, 0usize);
    for a in 0..=last {
        let p10 = a as f64 / steps as f64;
        for b in 0..=last {
            let p20 = b as f64 / steps as f64;
            let q10 = 1.0 - p10;
            let base = hs[a] + q10 * hs[b];
            let q20 = q10 * (1.0 - p20);
            for c in 0..=last {
                let p21 = c as f64 / steps as f64;
                let q21 = q10 * p20 + p10 * (1.0 - p21);
                let q22 = p10 * p21;
                let even = q20 + q22;
                let inner = if even > 0.0 { even * (1.0 + (-q22 / even).exp2()).log2() } else { 0.0 };
                let v = base + p10 * hs[c] + q21 + 1.0 + inner;
                if v > best.0 {
                    best = (v, a, b, c);
                }
            }
        }
    }
    let (p10, p20, p21) =
        (best.1 as f64 / steps as f64, best.2 as f64 / steps as f64, best.3 as f64 / steps as f64);
    let (value, p30) = total(p10, p20, p21);
    let bound = 15f64.log2();
    println!(
        "{{\"model\":\"EIP_DIA\",\"t\":4,\"ell\":3,\"step\":0.001,\"value\":{value:.10},\
         \"p10\":{p10},\"p20\":{p20},\"p21\":{p21},\"p30\":{p30:.10},\"p31\":0.5,\
         \"p40\":0.5,\"p41\":0.5,\"upper\":{bound:.10},\"gap\":{:.10},\"margin\":0.0095}}",
        bound - value
    );
}
