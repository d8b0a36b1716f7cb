//! Finite-difference boundary-value oracle for the speed ODE.
//!
//! Independent of the shooting solver: the system is discretized on `[0, L]`
//! with `A(L) = 0`, solved as one banded linear system, and the slope is read
//! off from `A'(0) = -int_0^L A''`. Two step sizes are Richardson-combined.

use ratchet_core::{solve_speed_ode, Params};

/// Banded Gaussian elimination without pivoting; `kl = ku = w`.
fn solve_banded(n: usize, w: usize, mut band: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Vec<f64> {
    // band[i][j - i + w] holds entry (i, j)
    for k in 0..n {
        let piv = band[k][w];
        assert!(piv.abs() > 1e-300);
        for i in k + 1..(k + w + 1).min(n) {
            let f = band[i][k + w - i] / piv;
            if f == 0.0 {
                continue;
            }
            for j in k..(k + w + 1).min(n) {
                band[i][j + w - i] -= f * band[k][j + w - k];
            }
            rhs[i] -= f * rhs[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for j in i + 1..(i + w + 1).min(n) {
            s -= band[i][j + w - i] * x[j];
        }
        x[i] = s / band[i][w];
    }
    x
}

/// Returns `A'(0)` for the discretization with `m` intervals on `[0, l]`.
fn fd_slope(gamma: f64, delta: f64, l: f64, m: usize) -> f64 {
    let h = l / m as f64;
    let n = 2 * (m + 1);
    let w = 3;
    let mut band = vec![vec![0.0; 2 * w + 1]; n];
    let mut rhs = vec![0.0; n];
    let set = |band: &mut Vec<Vec<f64>>, i: usize, j: usize, v: f64| band[i][j + w - i] += v;
    let ai = |i: usize| 2 * i;
    let bi = |i: usize| 2 * i + 1;
    set(&mut band, ai(0), ai(0), 1.0);
    rhs[ai(0)] = 0.5;
    set(&mut band, bi(0), bi(0), 1.0);
    for i in 1..=m {
        // B equation on [z_{i-1}, z_i], trapezoid
        let r = bi(i);
        set(&mut band, r, bi(i), 1.0 / h + gamma / (2.0 * delta));
        set(&mut band, r, bi(i - 1), -1.0 / h + gamma / (2.0 * delta));
        set(&mut band, r, ai(i), 1.0 / h);
        set(&mut band, r, ai(i - 1), -1.0 / h);
        // A equation at z_i
        let r = ai(i);
        if i == m {
            set(&mut band, r, ai(m), 1.0);
        } else {
            let z = i as f64 * h;
            set(&mut band, r, ai(i - 1), 1.0 / (h * h));
            set(&mut band, r, ai(i), -2.0 / (h * h) - 2.0 * gamma * z);
            set(&mut band, r, ai(i + 1), 1.0 / (h * h));
            set(&mut band, r, bi(i), 2.0 * delta);
        }
    }
    let x = solve_banded(n, w, band, rhs);
    // A'(0) = -int (2 gamma z A - 2 delta B), trapezoid
    let f = |i: usize| 2.0 * gamma * (i as f64 * h) * x[ai(i)] - 2.0 * delta * x[bi(i)];
    let mut s = 0.5 * (f(0) + f(m));
    for i in 1..m {
        s += f(i);
    }
    -s * h
}

fn oracle_speed(gamma: f64, delta: f64, l: f64) -> f64 {
    let coarse = fd_slope(gamma, delta, l, 4000);
    let fine = fd_slope(gamma, delta, l, 8000);
    -(4.0 * fine - coarse) / 3.0
}

#[test]
fn shooting_matches_fd_oracle() {
    for (g, d, l) in [(0.5, 0.25, 20.0), (0.5, 1.0, 60.0), (1.0, 0.5, 30.0)] {
        let oracle = oracle_speed(g, d, l);
        let shot = solve_speed_ode(&Params::at_origin(g, d).unwrap(), 1e3, 1e-12)
            .unwrap()
            .speed;
        assert!(
            (oracle - shot).abs() < 1e-6,
            "gamma {g} delta {d}: {oracle} vs {shot}"
        );
    }
}
