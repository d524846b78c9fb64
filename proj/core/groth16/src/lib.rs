//! C ABI over arkworks Groth16 on BN254 for generic rank-1 constraint systems.
//!
//! The constraint system arrives in the compact encoding produced by
//! `vsl::encode_r1cs`:
//!
//!   u32 num_public, u32 num_private, u32 num_constraints,
//!   then per constraint the A, B, C linear combinations, each
//!   u32 term_count followed by (u32 variable, 32-byte LE coefficient).
//!
//! Variable 0 is the constant one, 1..=num_public the statement, the rest
//! private. All integers are little-endian.

use std::panic::{catch_unwind, AssertUnwindSafe};

use ark_bn254::{Bn254, Fr};
use ark_ff::{BigInt, PrimeField};
use ark_groth16::{Groth16, Proof, ProvingKey, VerifyingKey};
use ark_relations::r1cs::{
    ConstraintSynthesizer, ConstraintSystemRef, LinearCombination, SynthesisError, Variable,
};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};
use ark_snark::SNARK;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub const VSL_G16_OK: i32 = 0;
pub const VSL_G16_REJECT: i32 = 1;
pub const VSL_G16_ERR_DECODE: i32 = -1;
pub const VSL_G16_ERR_SYNTHESIS: i32 = -2;
pub const VSL_G16_ERR_SERIALIZE: i32 = -3;
pub const VSL_G16_ERR_PANIC: i32 = -4;

#[repr(C)]
pub struct VslBuf {
    pub data: *mut u8,
    pub len: usize,
}

impl VslBuf {
    fn empty() -> Self {
        VslBuf { data: std::ptr::null_mut(), len: 0 }
    }

    fn from_vec(v: Vec<u8>) -> Self {
        let mut b = v.into_boxed_slice();
        let len = b.len();
        let data = b.as_mut_ptr();
        std::mem::forget(b);
        VslBuf { data, len }
    }
}

type Terms = Vec<(u32, Fr)>;

struct R1cs {
    num_public: usize,
    num_private: usize,
    constraints: Vec<[Terms; 3]>,
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn u32(&mut self) -> Option<u32> {
        let s = self.buf.get(self.pos..self.pos + 4)?;
        self.pos += 4;
        Some(u32::from_le_bytes(s.try_into().ok()?))
    }

    fn fr(&mut self) -> Option<Fr> {
        let s = self.buf.get(self.pos..self.pos + 32)?;
        self.pos += 32;
        fr_from_le(s)
    }
}

fn fr_from_le(s: &[u8]) -> Option<Fr> {
    let mut limbs = [0u64; 4];
    for (i, limb) in limbs.iter_mut().enumerate() {
        *limb = u64::from_le_bytes(s[8 * i..8 * i + 8].try_into().ok()?);
    }
    Fr::from_bigint(BigInt::new(limbs))
}

fn parse_r1cs(bytes: &[u8]) -> Option<R1cs> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let num_public = r.u32()? as usize;
    let num_private = r.u32()? as usize;
    let num_constraints = r.u32()? as usize;
    let num_vars = 1 + num_public + num_private;
    let mut constraints = Vec::with_capacity(num_constraints);
    for _ in 0..num_constraints {
        let mut lcs: [Terms; 3] = Default::default();
        for lc in lcs.iter_mut() {
            let n = r.u32()? as usize;
            lc.reserve(n);
            for _ in 0..n {
                let var = r.u32()?;
                if var as usize >= num_vars {
                    return None;
                }
                lc.push((var, r.fr()?));
            }
        }
        constraints.push(lcs);
    }
    if r.pos != bytes.len() {
        return None;
    }
    Some(R1cs { num_public, num_private, constraints })
}

fn parse_elements(bytes: &[u8]) -> Option<Vec<Fr>> {
    if bytes.len() % 32 != 0 {
        return None;
    }
    bytes.chunks_exact(32).map(fr_from_le).collect()
}

struct Circuit<'a> {
    r1cs: &'a R1cs,
    assignment: Option<&'a [Fr]>,
}

impl<'a> ConstraintSynthesizer<Fr> for Circuit<'a> {
    fn generate_constraints(self, cs: ConstraintSystemRef<Fr>) -> Result<(), SynthesisError> {
        let value = |i: usize| -> Result<Fr, SynthesisError> {
            self.assignment
                .map(|a| a[i])
                .ok_or(SynthesisError::AssignmentMissing)
        };
        let mut vars = Vec::with_capacity(1 + self.r1cs.num_public + self.r1cs.num_private);
        vars.push(Variable::One);
        for i in 0..self.r1cs.num_public {
            vars.push(cs.new_input_variable(|| value(1 + i))?);
        }
        let offset = 1 + self.r1cs.num_public;
        for i in 0..self.r1cs.num_private {
            vars.push(cs.new_witness_variable(|| value(offset + i))?);
        }
        let to_lc = |terms: &Terms| {
            LinearCombination(terms.iter().map(|(v, c)| (*c, vars[*v as usize])).collect())
        };
        for [a, b, c] in &self.r1cs.constraints {
            cs.enforce_constraint(to_lc(a), to_lc(b), to_lc(c))?;
        }
        Ok(())
    }
}

unsafe fn slice<'a>(ptr: *const u8, len: usize) -> &'a [u8] {
    if ptr.is_null() || len == 0 {
        &[]
    } else {
        std::slice::from_raw_parts(ptr, len)
    }
}

fn guarded<F: FnOnce() -> i32>(f: F) -> i32 {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(VSL_G16_ERR_PANIC)
}

/// Circuit-specific setup. Keys are written with the uncompressed encoding.
#[no_mangle]
pub unsafe extern "C" fn vsl_g16_setup(
    r1cs_ptr: *const u8,
    r1cs_len: usize,
    seed: *const u8,
    pk_out: *mut VslBuf,
    vk_out: *mut VslBuf,
) -> i32 {
    let r1cs_bytes = slice(r1cs_ptr, r1cs_len);
    let seed_bytes: [u8; 32] = match slice(seed, 32).try_into() {
        Ok(s) => s,
        Err(_) => return VSL_G16_ERR_DECODE,
    };
    *pk_out = VslBuf::empty();
    *vk_out = VslBuf::empty();
    guarded(|| {
        let Some(r1cs) = parse_r1cs(r1cs_bytes) else { return VSL_G16_ERR_DECODE };
        let mut rng = ChaCha20Rng::from_seed(seed_bytes);
        let circuit = Circuit { r1cs: &r1cs, assignment: None };
        let Ok((pk, vk)) = Groth16::<Bn254>::circuit_specific_setup(circuit, &mut rng) else {
            return VSL_G16_ERR_SYNTHESIS;
        };
        let mut pk_bytes = Vec::new();
        let mut vk_bytes = Vec::new();
        if pk.serialize_uncompressed(&mut pk_bytes).is_err()
            || vk.serialize_uncompressed(&mut vk_bytes).is_err()
        {
            return VSL_G16_ERR_SERIALIZE;
        }
        *pk_out = VslBuf::from_vec(pk_bytes);
        *vk_out = VslBuf::from_vec(vk_bytes);
        VSL_G16_OK
    })
}

/// Proves with a full assignment (constant one first). Does not check
/// satisfaction; callers are expected to do that first.
#[no_mangle]
pub unsafe extern "C" fn vsl_g16_prove(
    pk_ptr: *const u8,
    pk_len: usize,
    r1cs_ptr: *const u8,
    r1cs_len: usize,
    witness_ptr: *const u8,
    witness_len: usize,
    seed: *const u8,
    proof_out: *mut VslBuf,
) -> i32 {
    let pk_bytes = slice(pk_ptr, pk_len);
    let r1cs_bytes = slice(r1cs_ptr, r1cs_len);
    let witness_bytes = slice(witness_ptr, witness_len);
    let seed_bytes: [u8; 32] = match slice(seed, 32).try_into() {
        Ok(s) => s,
        Err(_) => return VSL_G16_ERR_DECODE,
    };
    *proof_out = VslBuf::empty();
    guarded(|| {
        let Some(r1cs) = parse_r1cs(r1cs_bytes) else { return VSL_G16_ERR_DECODE };
        let Some(assignment) = parse_elements(witness_bytes) else { return VSL_G16_ERR_DECODE };
        if assignment.len() != 1 + r1cs.num_public + r1cs.num_private {
            return VSL_G16_ERR_DECODE;
        }
        let Ok(pk) = ProvingKey::<Bn254>::deserialize_uncompressed_unchecked(pk_bytes) else {
            return VSL_G16_ERR_DECODE;
        };
        let mut rng = ChaCha20Rng::from_seed(seed_bytes);
        let circuit = Circuit { r1cs: &r1cs, assignment: Some(&assignment) };
        let Ok(proof) = Groth16::<Bn254>::prove(&pk, circuit, &mut rng) else {
            return VSL_G16_ERR_SYNTHESIS;
        };
        let mut out = Vec::new();
        if proof.serialize_compressed(&mut out).is_err() {
            return VSL_G16_ERR_SERIALIZE;
        }
        *proof_out = VslBuf::from_vec(out);
        VSL_G16_OK
    })
}

/// Returns VSL_G16_OK on accept, VSL_G16_REJECT on reject or malformed proof,
/// and a negative code when the verifying key or statement cannot be decoded.
#[no_mangle]
pub unsafe extern "C" fn vsl_g16_verify(
    vk_ptr: *const u8,
    vk_len: usize,
    public_ptr: *const u8,
    public_len: usize,
    proof_ptr: *const u8,
    proof_len: usize,
) -> i32 {
    let vk_bytes = slice(vk_ptr, vk_len);
    let public_bytes = slice(public_ptr, public_len);
    let proof_bytes = slice(proof_ptr, proof_len);
    guarded(|| {
        let Ok(vk) = VerifyingKey::<Bn254>::deserialize_uncompressed_unchecked(vk_bytes) else {
            return VSL_G16_ERR_DECODE;
        };
        let Some(inputs) = parse_elements(public_bytes) else { return VSL_G16_ERR_DECODE };
        if inputs.len() + 1 != vk.gamma_abc_g1.len() {
            return VSL_G16_REJECT;
        }
        let Ok(proof) = Proof::<Bn254>::deserialize_compressed(proof_bytes) else {
            return VSL_G16_REJECT;
        };
        match Groth16::<Bn254>::verify(&vk, &inputs, &proof) {
            Ok(true) => VSL_G16_OK,
            _ => VSL_G16_REJECT,
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn vsl_g16_free(buf: VslBuf) {
    if !buf.data.is_null() {
        drop(Box::from_raw(std::ptr::slice_from_raw_parts_mut(buf.data, buf.len)));
    }
}
