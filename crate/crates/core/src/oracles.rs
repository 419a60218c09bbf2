//! Slow, direct reference implementations for tests. Nothing here shares
//! code with the production paths beyond the public data types.

#![allow(clippy::needless_range_loop)]

use std::f64::consts::PI;

use crate::image::GrayImage;

fn mirror(i: isize, n: usize) -> usize {
    let n = n as isize;
    let mut i = i;
    while i < 0 || i >= n {
        i = if i < 0 { -i - 1 } else { 2 * n - i - 1 };
    }
    i as usize
}

fn pixel(img: &GrayImage, x: isize, y: isize) -> f64 {
    img.data()[mirror(y, img.height()) * img.width() + mirror(x, img.width())]
}

fn split(v: f64) -> (f64, f64) {
    if (v - v.round()).abs() < 1e-6 {
        (v.round(), 0.0)
    } else {
        (v.floor(), v - v.floor())
    }
}

/// riu2 codes of an unpadded image, reading out-of-range pixels through
/// mirror reflection and evaluating every pixel from scratch.
pub fn brute_force_lbp_codes(img: &GrayImage, p: usize, r: f64) -> Vec<u32> {
    let mut codes = Vec::with_capacity(img.width() * img.height());
    for y in 0..img.height() as isize {
        for x in 0..img.width() as isize {
            let center = pixel(img, x, y);
            let mut bits = Vec::with_capacity(p);
            for i in 0..p {
                let angle = 2.0 * PI * i as f64 / p as f64;
                let (ix, fx) = split(r * angle.cos());
                let (iy, fy) = split(-r * angle.sin());
                let (x0, y0) = (x + ix as isize, y + iy as isize);
                let a = pixel(img, x0, y0);
                let value = if fx == 0.0 && fy == 0.0 {
                    a
                } else if fy == 0.0 {
                    a + fx * (pixel(img, x0 + 1, y0) - a)
                } else if fx == 0.0 {
                    a + fy * (pixel(img, x0, y0 + 1) - a)
                } else {
                    let c = pixel(img, x0, y0 + 1);
                    let top = a + fx * (pixel(img, x0 + 1, y0) - a);
                    let bottom = c + fx * (pixel(img, x0 + 1, y0 + 1) - c);
                    top + fy * (bottom - top)
                };
                bits.push(if value - center > 0.0 { 1i32 } else { 0 });
            }
            let mut u = (bits[p - 1] - bits[0]).abs();
            for k in 1..p {
                u += (bits[k] - bits[k - 1]).abs();
            }
            codes.push(if u <= 2 {
                bits.iter().sum::<i32>() as u32
            } else {
                p as u32 + 1
            });
        }
    }
    codes
}

/// Unbiased sample covariance, formed explicitly.
pub fn covariance(samples: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = samples.len();
    let d = samples[0].len();
    let mean: Vec<f64> = (0..d)
        .map(|j| samples.iter().map(|s| s[j]).sum::<f64>() / n as f64)
        .collect();
    let mut cov = vec![vec![0.0; d]; d];
    for s in samples {
        for i in 0..d {
            for j in 0..d {
                cov[i][j] += (s[i] - mean[i]) * (s[j] - mean[j]);
            }
        }
    }
    for row in &mut cov {
        for v in row.iter_mut() {
            *v /= (n - 1) as f64;
        }
    }
    cov
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted
/// in decreasing order.
pub fn jacobi_eigenvalues(matrix: &[Vec<f64>]) -> Vec<f64> {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut values: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    values.sort_by(|x, y| y.total_cmp(x));
    values
}

/// Inverse and log-determinant by Gauss-Jordan elimination with partial
/// pivoting.
pub fn invert_with_log_det(matrix: &[Vec<f64>]) -> (Vec<Vec<f64>>, f64) {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut log_det = 0.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let pv = a[col][col];
        log_det += pv.abs().ln();
        for j in 0..n {
            a[col][j] /= pv;
            inv[col][j] /= pv;
        }
        for i in 0..n {
            if i != col {
                let f = a[i][col];
                for j in 0..n {
                    a[i][j] -= f * a[col][j];
                    inv[i][j] -= f * inv[col][j];
                }
            }
        }
    }
    (inv, log_det)
}

/// Label maximizing `ln π_c + ln N(x; μ_c, Σ')`, where `Σ'` is the pooled
/// within-class covariance shrunk toward `(tr Σ / d) I` by `shrinkage`.
/// Labels are considered in sorted order; the first maximum wins.
pub fn gaussian_bayes_predict(
    samples: &[Vec<f64>],
    labels: &[String],
    shrinkage: f64,
    query: &[f64],
) -> String {
    let mut classes: Vec<&String> = labels.iter().collect();
    classes.sort();
    classes.dedup();
    let d = samples[0].len();
    let n = samples.len();
    let mut pooled = vec![vec![0.0; d]; d];
    let mut means = Vec::new();
    for class in &classes {
        let members: Vec<&Vec<f64>> = samples
            .iter()
            .zip(labels)
            .filter(|(_, l)| l == class)
            .map(|(s, _)| s)
            .collect();
        let mean: Vec<f64> = (0..d)
            .map(|j| members.iter().map(|s| s[j]).sum::<f64>() / members.len() as f64)
            .collect();
        for s in &members {
            for i in 0..d {
                for j in 0..d {
                    pooled[i][j] += (s[i] - mean[i]) * (s[j] - mean[j]);
                }
            }
        }
        means.push((mean, members.len() as f64 / n as f64));
    }
    let dof = (n - classes.len()) as f64;
    let trace: f64 = (0..d).map(|i| pooled[i][i] / dof).sum();
    let scale = if trace > 0.0 { trace / d as f64 } else { 1.0 };
    for i in 0..d {
        for j in 0..d {
            pooled[i][j] = (1.0 - shrinkage) * pooled[i][j] / dof;
        }
        pooled[i][i] += shrinkage * scale;
    }
    let (inv, log_det) = invert_with_log_det(&pooled);
    let mut best: Option<(f64, &String)> = None;
    for (class, (mean, prior)) in classes.iter().zip(&means) {
        let diff: Vec<f64> = query.iter().zip(mean).map(|(x, m)| x - m).collect();
        let mut quad = 0.0;
        for i in 0..d {
            for j in 0..d {
                quad += diff[i] * inv[i][j] * diff[j];
            }
        }
        let log_density = -0.5 * (quad + log_det + d as f64 * (2.0 * PI).ln());
        let score = prior.ln() + log_density;
        if best.is_none_or(|(b, _)| score > b) {
            best = Some((score, class));
        }
    }
    best.unwrap().1.clone()
}
