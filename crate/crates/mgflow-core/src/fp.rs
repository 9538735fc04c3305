//! Float math that works in both `std` and `no_std` (libm) builds.
//!
//! Transcendental functions and the rounding family are shimmed: each
//! function inlines to the `std` method when available, else to the `libm`
//! implementation. Pure bit/arithmetic helpers (`abs`, `max`, ...) come from
//! `core` and need no shim.

#![allow(dead_code)]

macro_rules! unary {
    ($(($name:ident, $libm:ident)),* $(,)?) => {
        $(
            #[inline(always)]
            pub fn $name(x: f64) -> f64 {
                #[cfg(feature = "std")]
                {
                    x.$name()
                }
                #[cfg(not(feature = "std"))]
                {
                    libm::$libm(x)
                }
            }
        )*
    };
}

unary!(
    (sin, sin),
    (cos, cos),
    (sinh, sinh),
    (cosh, cosh),
    (exp, exp),
    (ln, log),
    (sqrt, sqrt),
    (acos, acos),
    (acosh, acosh),
    (floor, floor),
    (round, round),
);

#[inline(always)]
pub fn atan2(y: f64, x: f64) -> f64 {
    #[cfg(feature = "std")]
    {
        y.atan2(x)
    }
    #[cfg(not(feature = "std"))]
    {
        libm::atan2(y, x)
    }
}

#[inline(always)]
pub fn abs(x: f64) -> f64 {
    #[cfg(feature = "std")]
    {
        x.abs()
    }
    #[cfg(not(feature = "std"))]
    {
        libm::fabs(x)
    }
}

/// Wrap `d` to the representative nearest zero modulo `period`.
#[inline(always)]
pub fn wrap_nearest(d: f64, period: f64) -> f64 {
    d - period * round(d / period)
}

/// Wrap `x` into the fundamental domain `[0, period)`.
#[inline(always)]
pub fn wrap_into(x: f64, period: f64) -> f64 {
    let r = x - period * floor(x / period);
    // Guard the half-open interval against `x/period` rounding up to 1.0.
    if r >= period {
        r - period
    } else {
        r
    }
}
