//! Simple-point tests on packed 3x3x3 neighborhoods under (26, 6) adjacency.
//!
//! Component counting works on 27-bit masks: a 26-dilation is three
//! separable shift-and-or passes, a 6-dilation is the union of the six
//! face shifts, and a flood fill iterates dilation until it stabilizes.

use crate::error::{Error, Result};
use crate::euler::euler_delta8;
use crate::grid::Neighborhood;

const FULL: u32 = Neighborhood::FULL;
const CENTER: u32 = Neighborhood::CENTER_MASK;

const fn axis_mask(stride: u32, index: u32) -> u32 {
    let mut m = 0u32;
    let mut k = 0u32;
    while k < 27 {
        if (k / stride) % 3 == index {
            m |= 1 << k;
        }
        k += 1;
    }
    m
}

const X_LOW: u32 = axis_mask(1, 0);
const X_HIGH: u32 = axis_mask(1, 2);
const Y_LOW: u32 = axis_mask(3, 0);
const Y_HIGH: u32 = axis_mask(3, 2);

/// Face neighbors of the center.
pub(crate) const N6: u32 = {
    1 << Neighborhood::bit(-1, 0, 0)
        | 1 << Neighborhood::bit(1, 0, 0)
        | 1 << Neighborhood::bit(0, -1, 0)
        | 1 << Neighborhood::bit(0, 1, 0)
        | 1 << Neighborhood::bit(0, 0, -1)
        | 1 << Neighborhood::bit(0, 0, 1)
};

/// Face and edge neighbors of the center.
pub(crate) const N18: u32 = {
    let mut m = 0u32;
    let mut k = 0;
    while k < 27 {
        let dx = k % 3;
        let dy = (k / 3) % 3;
        let dz = k / 9;
        let nonzero = (dx != 1) as u32 + (dy != 1) as u32 + (dz != 1) as u32;
        if nonzero == 1 || nonzero == 2 {
            m |= 1 << k;
        }
        k += 1;
    }
    m
};

/// All 26 neighbors.
pub(crate) const N26: u32 = FULL & !CENTER;

#[inline(always)]
fn shift_x(m: u32) -> u32 {
    ((m << 1) & !X_LOW & FULL) | ((m >> 1) & !X_HIGH)
}

#[inline(always)]
fn shift_y(m: u32) -> u32 {
    ((m << 3) & !Y_LOW & FULL) | ((m >> 3) & !Y_HIGH)
}

#[inline(always)]
fn shift_z(m: u32) -> u32 {
    ((m << 9) & FULL) | (m >> 9)
}

#[inline(always)]
fn dilate26(m: u32) -> u32 {
    let m = m | shift_x(m);
    let m = m | shift_y(m);
    m | shift_z(m)
}

#[inline(always)]
fn dilate6(m: u32) -> u32 {
    m | shift_x(m) | shift_y(m) | shift_z(m)
}

#[inline(always)]
fn flood(seed: u32, within: u32, dilate: fn(u32) -> u32) -> u32 {
    let mut comp = seed;
    loop {
        let next = dilate(comp) & within;
        if next == comp {
            return comp;
        }
        comp = next;
    }
}

/// Connected components of `set`, each returned as a mask.
fn components(set: u32, dilate: fn(u32) -> u32) -> impl Iterator<Item = u32> {
    let mut remaining = set;
    std::iter::from_fn(move || {
        if remaining == 0 {
            return None;
        }
        let seed = remaining & remaining.wrapping_neg();
        let comp = flood(seed, set, dilate);
        remaining &= !comp;
        Some(comp)
    })
}

/// Number of 26-connected foreground components in the 26-neighborhood.
pub fn t26(config: Neighborhood) -> u32 {
    components(config.bits() & N26, dilate26).count() as u32
}

/// Number of 6-connected background components of the 18-neighborhood
/// that contain a face neighbor of the center.
pub fn t6(config: Neighborhood) -> u32 {
    let background = !config.bits() & N18;
    components(background, dilate6)
        .filter(|c| c & N6 != 0)
        .count() as u32
}

fn require_center(config: Neighborhood) -> Result<()> {
    if config.center_set() {
        Ok(())
    } else {
        Err(Error::BackgroundCenter(config.bits()))
    }
}

/// Simplicity through Euler-characteristic invariance plus a single
/// remaining foreground component and an exposed face.
pub fn is_simple_euler(config: Neighborhood) -> Result<bool> {
    require_center(config)?;
    Ok(simple_euler(config))
}

#[inline]
pub(crate) fn simple_euler(config: Neighborhood) -> bool {
    if euler_delta8(config) != 0 {
        return false;
    }
    let fg = config.bits() & N26;
    if fg == 0 {
        return false;
    }
    let seed = fg & fg.wrapping_neg();
    if flood(seed, fg, dilate26) != fg {
        return false;
    }
    // The freed center must join existing background rather than form a cavity.
    !config.bits() & N6 != 0
}

/// Simplicity through the topological numbers: T26 = 1 and T6 = 1.
pub fn is_simple_boolean(config: Neighborhood) -> Result<bool> {
    require_center(config)?;
    Ok(simple_boolean(config))
}

#[inline]
pub(crate) fn simple_boolean(config: Neighborhood) -> bool {
    t26(config) == 1 && t6(config) == 1
}

/// At most one foreground 26-neighbor.
pub fn is_endpoint(config: Neighborhood) -> bool {
    config.neighbor_count() <= 1
}
