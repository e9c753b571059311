//! Pluggable XOR-homomorphic bit encryption, instantiated with the
//! quadratic-residuosity (Goldwasser-Micali) scheme at desk-scale
//! parameters.
//!
//! A ciphertext of bit `m` is `y^m * r^2 mod N` for a uniform unit `r`;
//! multiplying ciphertexts XORs the plaintexts, and the secret factorization
//! decides residuosity. The default prime sizes here (12-24 bits) are for
//! protocol-structure experiments only and are NOT cryptographically secure
//! parameters.

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Public half of a key pair: the modulus and a pseudo-residue.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HePublicKey {
    #[serde(with = "biguint_dec")]
    pub modulus: BigUint,
    #[serde(with = "biguint_dec")]
    pub nonresidue: BigUint,
}

/// Secret half: the prime factorization of the modulus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeSecretKey {
    #[serde(with = "biguint_dec")]
    pub p: BigUint,
    #[serde(with = "biguint_dec")]
    pub q: BigUint,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeKeyPair {
    pub public: HePublicKey,
    pub secret: HeSecretKey,
}

/// An encrypted bit. Carries its modulus so mixed-key arithmetic is caught.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeCiphertext {
    #[serde(with = "biguint_dec")]
    pub value: BigUint,
    #[serde(with = "biguint_dec")]
    pub modulus: BigUint,
}

/// Interface for swapping in an externally provided XOR-homomorphic
/// scheme: bit encryption where a public operation on ciphertexts decrypts
/// to the XOR of the plaintexts.
pub trait XorHomomorphic {
    type Ciphertext: Clone;

    /// Public-key encryption of one bit.
    fn encrypt<R: Rng + ?Sized>(&self, m: u8, rng: &mut R) -> Self::Ciphertext;
    /// Public homomorphic combination; decrypts to the XOR.
    fn xor(&self, c1: &Self::Ciphertext, c2: &Self::Ciphertext) -> Result<Self::Ciphertext>;
    /// Secret-key decryption.
    fn decrypt(&self, c: &Self::Ciphertext) -> Result<u8>;
}

impl XorHomomorphic for HeKeyPair {
    type Ciphertext = HeCiphertext;

    fn encrypt<R: Rng + ?Sized>(&self, m: u8, rng: &mut R) -> HeCiphertext {
        he_encrypt(&self.public, m, rng)
    }
    fn xor(&self, c1: &HeCiphertext, c2: &HeCiphertext) -> Result<HeCiphertext> {
        he_xor(&self.public, c1, c2)
    }
    fn decrypt(&self, c: &HeCiphertext) -> Result<u8> {
        he_decrypt(&self.secret, c)
    }
}

const KEYGEN_ATTEMPTS: usize = 100_000;

/// Generates a key pair with two distinct odd primes of `prime_bits` bits
/// and a nonresidue with Jacobi symbol +1. Deterministic given the RNG.
pub fn he_keygen<R: Rng + ?Sized>(prime_bits: usize, rng: &mut R) -> Result<HeKeyPair> {
    if prime_bits < 8 {
        return Err(Error::PrimeBitsTooSmall(prime_bits));
    }
    let p = random_prime(prime_bits, rng)?;
    let mut q = random_prime(prime_bits, rng)?;
    let mut guard = 0;
    while q == p {
        q = random_prime(prime_bits, rng)?;
        guard += 1;
        if guard > KEYGEN_ATTEMPTS {
            return Err(Error::PrimeSearchExhausted(guard));
        }
    }
    let modulus = &p * &q;

    // A quadratic non-residue modulo both primes has Jacobi symbol +1
    // modulo N, so ciphertexts of 0 and 1 are statistically identical in
    // the Jacobi sense.
    for _ in 0..KEYGEN_ATTEMPTS {
        let y = rng.gen_biguint_range(&BigUint::from(2u8), &modulus);
        if y.gcd(&modulus) != BigUint::one() {
            continue;
        }
        if legendre_is_nonresidue(&y, &p) && legendre_is_nonresidue(&y, &q) {
            return Ok(HeKeyPair {
                public: HePublicKey {
                    modulus,
                    nonresidue: y,
                },
                secret: HeSecretKey { p, q },
            });
        }
    }
    Err(Error::PrimeSearchExhausted(KEYGEN_ATTEMPTS))
}

/// `c = y^m * r^2 mod N` for uniform `r` coprime to `N`.
pub fn he_encrypt<R: Rng + ?Sized>(pk: &HePublicKey, m: u8, rng: &mut R) -> HeCiphertext {
    let n = &pk.modulus;
    let r = loop {
        let r = rng.gen_biguint_range(&BigUint::one(), n);
        if r.gcd(n) == BigUint::one() {
            break r;
        }
    };
    let mut value = (&r * &r) % n;
    if m & 1 == 1 {
        value = (value * &pk.nonresidue) % n;
    }
    HeCiphertext {
        value,
        modulus: n.clone(),
    }
}

/// Homomorphic XOR: `c1 * c2 mod N`.
pub fn he_xor(pk: &HePublicKey, c1: &HeCiphertext, c2: &HeCiphertext) -> Result<HeCiphertext> {
    if c1.modulus != pk.modulus || c2.modulus != pk.modulus {
        return Err(Error::ModulusMismatch);
    }
    Ok(HeCiphertext {
        value: (&c1.value * &c2.value) % &pk.modulus,
        modulus: pk.modulus.clone(),
    })
}

/// Decrypts by the Legendre symbol modulo `p`: residues are 0, the rest 1.
pub fn he_decrypt(sk: &HeSecretKey, c: &HeCiphertext) -> Result<u8> {
    let n = &sk.p * &sk.q;
    if c.modulus != n {
        return Err(Error::ModulusMismatch);
    }
    if c.value.gcd(&n) != BigUint::one() {
        return Err(Error::NotCoprime);
    }
    Ok(if legendre_is_nonresidue(&c.value, &sk.p) {
        1
    } else {
        0
    })
}

/// Euler criterion: `a^{(p-1)/2} = p-1 (mod p)` iff `a` is a non-residue.
fn legendre_is_nonresidue(a: &BigUint, p: &BigUint) -> bool {
    let exp = (p - BigUint::one()) >> 1;
    let r = a.modpow(&exp, p);
    r == p - BigUint::one()
}

fn random_prime<R: Rng + ?Sized>(bits: usize, rng: &mut R) -> Result<BigUint> {
    for _ in 0..KEYGEN_ATTEMPTS {
        let mut candidate = rng.gen_biguint(bits as u64);
        candidate.set_bit(bits as u64 - 1, true);
        candidate.set_bit(0, true);
        if is_prime(&candidate) {
            return Ok(candidate);
        }
    }
    Err(Error::PrimeSearchExhausted(KEYGEN_ATTEMPTS))
}

/// Miller-Rabin with a fixed base set, deterministic for all 64-bit inputs
/// (desk-scale primes are far below that).
fn is_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u8);
    if n < &two {
        return false;
    }
    for small in [2u8, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let s = BigUint::from(small);
        if n == &s {
            return true;
        }
        if (n % &s).is_zero() {
            return false;
        }
    }
    let n_minus_1 = n - BigUint::one();
    let trailing = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> trailing;
    'witness: for base in [2u8, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = BigUint::from(base).modpow(&d, n);
        if x == BigUint::one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..trailing {
            x = (&x * &x) % n;
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

mod biguint_dec {
    //! Big integers serialize as decimal strings.
    use num_bigint::BigUint;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        v: &BigUint,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&v.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<BigUint, D::Error> {
        let s = String::deserialize(deserializer)?;
        BigUint::parse_bytes(s.as_bytes(), 10)
            .ok_or_else(|| D::Error::custom("not a decimal big integer"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn keypair(seed: u64, bits: usize) -> HeKeyPair {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        he_keygen(bits, &mut rng).unwrap()
    }

    #[test]
    fn keygen_invariants_hold() {
        let kp = keypair(1, 16);
        assert_eq!(&kp.secret.p * &kp.secret.q, kp.public.modulus);
        assert_ne!(kp.secret.p, kp.secret.q);
        assert!(is_prime(&kp.secret.p));
        assert!(is_prime(&kp.secret.q));
        assert!(kp.public.modulus.bits() >= 31);
        // y is a non-residue modulo both primes.
        assert!(legendre_is_nonresidue(&kp.public.nonresidue, &kp.secret.p));
        assert!(legendre_is_nonresidue(&kp.public.nonresidue, &kp.secret.q));
    }

    #[test]
    fn different_seeds_give_different_moduli() {
        let mut moduli = std::collections::HashSet::new();
        for seed in 0..100u64 {
            moduli.insert(keypair(seed, 12).public.modulus);
        }
        assert!(moduli.len() >= 99, "got {} distinct moduli", moduli.len());
    }

    #[test]
    fn encrypt_of_zero_is_a_residue_and_round_trips() {
        let kp = keypair(2, 16);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let c = he_encrypt(&kp.public, 0, &mut rng);
        assert!(!legendre_is_nonresidue(&c.value, &kp.secret.p));
        assert!(!legendre_is_nonresidue(&c.value, &kp.secret.q));
        assert_eq!(he_decrypt(&kp.secret, &c).unwrap(), 0);
    }

    #[test]
    fn round_trip_over_randomized_trials_and_sizes() {
        for (seed, bits) in [(3u64, 12usize), (4, 16), (5, 24)] {
            let kp = keypair(seed, bits);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
            for i in 0..1000 {
                let m = (i % 2) as u8;
                let c = he_encrypt(&kp.public, m, &mut rng);
                assert_eq!(he_decrypt(&kp.secret, &c).unwrap(), m);
            }
        }
    }

    #[test]
    fn encryption_is_randomized() {
        let kp = keypair(6, 16);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = he_encrypt(&kp.public, 1, &mut rng);
        let b = he_encrypt(&kp.public, 1, &mut rng);
        assert_ne!(a.value, b.value);
    }

    #[test]
    fn xor_homomorphism_matches_plaintext_shadow() {
        let kp = keypair(8, 16);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        // Enc(1)*Enc(1) decrypts to 0: y^2 is a residue.
        let c1 = he_encrypt(&kp.public, 1, &mut rng);
        let c2 = he_encrypt(&kp.public, 1, &mut rng);
        let c = he_xor(&kp.public, &c1, &c2).unwrap();
        assert_eq!(he_decrypt(&kp.secret, &c).unwrap(), 0);

        // Folding a chain of ciphertexts tracks the XOR of the plaintexts.
        for trial in 0..50 {
            let len = 1 + (trial % 12);
            let bits: Vec<u8> = (0..len).map(|_| rng.gen_range(0..2u8)).collect();
            let shadow = bits.iter().fold(0u8, |acc, b| acc ^ b);
            let mut acc = he_encrypt(&kp.public, bits[0], &mut rng);
            for &b in &bits[1..] {
                let c = he_encrypt(&kp.public, b, &mut rng);
                acc = he_xor(&kp.public, &acc, &c).unwrap();
            }
            assert_eq!(he_decrypt(&kp.secret, &acc).unwrap(), shadow);
        }
    }

    #[test]
    fn trivial_ciphertext_one_decrypts_to_zero() {
        let kp = keypair(10, 16);
        let c = HeCiphertext {
            value: BigUint::one(),
            modulus: kp.public.modulus.clone(),
        };
        assert_eq!(he_decrypt(&kp.secret, &c).unwrap(), 0);
    }

    #[test]
    fn modulus_mismatch_and_non_units_are_rejected() {
        let kp1 = keypair(11, 12);
        let kp2 = keypair(12, 12);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let c1 = he_encrypt(&kp1.public, 0, &mut rng);
        let c2 = he_encrypt(&kp2.public, 0, &mut rng);
        assert!(matches!(
            he_xor(&kp1.public, &c1, &c2),
            Err(Error::ModulusMismatch)
        ));
        let bad = HeCiphertext {
            value: kp1.secret.p.clone(),
            modulus: kp1.public.modulus.clone(),
        };
        assert!(matches!(
            he_decrypt(&kp1.secret, &bad),
            Err(Error::NotCoprime)
        ));
    }

    #[test]
    fn keys_and_ciphertexts_serialize_as_decimal_strings() {
        let kp = keypair(14, 12);
        let s = serde_json::to_string(&kp).unwrap();
        let back: HeKeyPair = serde_json::from_str(&s).unwrap();
        assert_eq!(kp, back);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert!(v["public"]["modulus"].is_string());
    }
}
