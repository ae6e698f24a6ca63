//! Commitment functionalities and 3-out-of-3 XOR secret sharing.
//!
//! Two commitment flavors coexist: an ideal state machine whose receipts
//! are bare sequence numbers (perfectly hiding and binding by fiat), and a
//! hash-based scheme whose hiding is only computational, which is exactly
//! what the brute-force attacker exploits.

use rand::RngCore;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng::Stream;

// ---------------------------------------------------------------------------
// ideal commitment

/// Opaque receipt for an ideal commitment: a sequence number, carrying no
/// information about the committed value at all.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Receipt(pub u64);

#[derive(Clone, Debug, PartialEq, Eq)]
enum IdealState {
    Empty,
    Committed(Vec<u8>),
    Opened,
}

/// Single-use ideal commitment functionality for one committer.
#[derive(Clone, Debug)]
pub struct IdealCommitment {
    state: IdealState,
    next_receipt: u64,
}

impl Default for IdealCommitment {
    fn default() -> Self {
        Self::new()
    }
}

impl IdealCommitment {
    pub fn new() -> Self {
        Self {
            state: IdealState::Empty,
            next_receipt: 0,
        }
    }

    pub fn commit(&mut self, x: &[u8]) -> Result<Receipt> {
        match self.state {
            IdealState::Empty => {
                self.state = IdealState::Committed(x.to_vec());
                let r = Receipt(self.next_receipt);
                self.next_receipt += 1;
                Ok(r)
            }
            _ => Err(Error::Protocol("ideal commitment: double commit".into())),
        }
    }

    pub fn open(&mut self) -> Result<Vec<u8>> {
        match std::mem::replace(&mut self.state, IdealState::Opened) {
            IdealState::Committed(x) => Ok(x),
            IdealState::Empty => {
                self.state = IdealState::Empty;
                Err(Error::Protocol("ideal commitment: open before commit".into()))
            }
            IdealState::Opened => Err(Error::Protocol("ideal commitment: double open".into())),
        }
    }

    pub fn is_committed(&self) -> bool {
        matches!(self.state, IdealState::Committed(_))
    }
}

// ---------------------------------------------------------------------------
// hash commitment

/// Commitment digest: SHA-256 truncated to its first 128 bits.
pub type Digest128 = [u8; 16];

/// Hash-based commitment over κ-bit values and λ-bit randomness.
///
/// Frozen hash-input layout: 2-byte big-endian κ, 2-byte big-endian λ,
/// x in ⌈κ/8⌉ big-endian bytes, r in ⌈λ/8⌉ big-endian bytes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HashCommitment {
    pub kappa: u16,
    pub lambda: u16,
}

impl HashCommitment {
    pub fn new(kappa: u16, lambda: u16) -> Result<Self> {
        if kappa == 0 || kappa > 64 || lambda == 0 || lambda > 64 {
            return Err(Error::Domain(format!(
                "hash commitment bit lengths must be in 1..=64 (got kappa={kappa}, lambda={lambda})"
            )));
        }
        Ok(Self { kappa, lambda })
    }

    /// λ = κ, the default pairing.
    pub fn square(kappa: u16) -> Result<Self> {
        Self::new(kappa, kappa)
    }

    fn check_range(&self, x: u64, r: u64) -> Result<()> {
        let max_x = bit_mask(self.kappa as u32);
        let max_r = bit_mask(self.lambda as u32);
        if x > max_x {
            return Err(Error::Domain(format!(
                "value {x} exceeds {} bits",
                self.kappa
            )));
        }
        if r > max_r {
            return Err(Error::Domain(format!(
                "randomness {r} exceeds {} bits",
                self.lambda
            )));
        }
        Ok(())
    }

    pub fn commit(&self, x: u64, r: u64) -> Result<Digest128> {
        self.check_range(x, r)?;
        let mut hasher = Sha256::new();
        hasher.update(self.kappa.to_be_bytes());
        hasher.update(self.lambda.to_be_bytes());
        hasher.update(&x.to_be_bytes()[8 - byte_len(self.kappa)..]);
        hasher.update(&r.to_be_bytes()[8 - byte_len(self.lambda)..]);
        let full = hasher.finalize();
        let mut out = [0u8; 16];
        out.copy_from_slice(&full[..16]);
        Ok(out)
    }

    pub fn verify(&self, c: &Digest128, x: u64, r: u64) -> Result<bool> {
        Ok(self.commit(x, r)? == *c)
    }

    /// Enumerate (x, r) lexicographically (x outer, r inner), spending one
    /// unit of budget per commit evaluation; first match wins.
    pub fn brute_force_open(&self, c: &Digest128, budget: u64) -> Result<Option<(u64, u64)>> {
        if budget == 0 {
            return Err(Error::Domain("brute force budget must be positive".into()));
        }
        let mut spent = 0u64;
        for x in 0..=bit_mask(self.kappa as u32) {
            for r in 0..=bit_mask(self.lambda as u32) {
                if spent >= budget {
                    return Ok(None);
                }
                spent += 1;
                if self.commit(x, r)? == *c {
                    return Ok(Some((x, r)));
                }
            }
        }
        Ok(None)
    }
}

fn bit_mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

fn byte_len(bits: u16) -> usize {
    bits.div_ceil(8) as usize
}

// ---------------------------------------------------------------------------
// XOR secret sharing

/// 3-out-of-3 XOR sharing of a bit-string secret.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct XorShareTriple {
    pub shares: [Vec<u8>; 3],
    pub bit_len: usize,
}

impl XorShareTriple {
    pub fn share(&self, i: usize) -> &[u8] {
        &self.shares[i]
    }
}

/// s₁, s₂ uniform; s₃ = m* ⊕ s₁ ⊕ s₂. Bits beyond `bit_len` are zero.
pub fn share_secret(m_star: &[u8], bit_len: usize, rng: &mut Stream) -> Result<XorShareTriple> {
    let n = bit_len.div_ceil(8);
    if m_star.len() != n {
        return Err(Error::Domain(format!(
            "secret has {} bytes, expected {n} for {bit_len} bits",
            m_star.len()
        )));
    }
    if bit_len == 0 {
        return Err(Error::Domain("bit length must be positive".into()));
    }
    if trailing_bits_set(m_star, bit_len) {
        return Err(Error::Domain("secret has bits set beyond its declared length".into()));
    }
    let mut s1 = vec![0u8; n];
    let mut s2 = vec![0u8; n];
    rng.fill_bytes(&mut s1);
    rng.fill_bytes(&mut s2);
    mask_to_bit_len(&mut s1, bit_len);
    mask_to_bit_len(&mut s2, bit_len);
    let s3: Vec<u8> = m_star
        .iter()
        .zip(s1.iter().zip(s2.iter()))
        .map(|(&m, (&a, &b))| m ^ a ^ b)
        .collect();
    Ok(XorShareTriple {
        shares: [s1, s2, s3],
        bit_len,
    })
}

/// XOR of all three shares; the unique reconstruction.
pub fn reconstruct(s1: &[u8], s2: &[u8], s3: &[u8]) -> Result<Vec<u8>> {
    if s1.len() != s2.len() || s2.len() != s3.len() {
        return Err(Error::Domain(format!(
            "share lengths differ: {}, {}, {}",
            s1.len(),
            s2.len(),
            s3.len()
        )));
    }
    Ok(s1
        .iter()
        .zip(s2.iter().zip(s3.iter()))
        .map(|(&a, (&b, &c))| a ^ b ^ c)
        .collect())
}

fn mask_to_bit_len(bytes: &mut [u8], bit_len: usize) {
    let spare = bytes.len() * 8 - bit_len;
    if spare > 0 {
        // big-endian convention: the first byte holds the high-order bits
        bytes[0] &= 0xFF >> spare;
    }
}

fn trailing_bits_set(bytes: &[u8], bit_len: usize) -> bool {
    let spare = bytes.len() * 8 - bit_len;
    spare > 0 && bytes[0] & !(0xFF >> spare) != 0
}
