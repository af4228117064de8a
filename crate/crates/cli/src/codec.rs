use anyhow::Result;
use recmat::cipher;
use recmat::files;

use crate::{check_pair, load_cipher, load_key, read_input, write_output, DecryptArgs, EncryptArgs, EXIT_OK};

pub fn encrypt(a: &EncryptArgs) -> Result<i32> {
    let key = load_key(&a.key)?;
    let bytes = read_input(a.input.as_deref(), a.text.as_deref())?;
    let ct = cipher::encrypt(&bytes, &key)?;
    write_output(a.out.as_deref(), files::write_cipher(&ct).as_bytes())?;
    Ok(EXIT_OK)
}

/// Corrupted input surfaces as a `NonIntegral`, `OutOfAlphabet` or
/// `NonZeroPadding` error, which maps to the corruption exit status.
pub fn decrypt(a: &DecryptArgs) -> Result<i32> {
    let key = load_key(&a.key)?;
    let ct = load_cipher(&a.cipher)?;
    check_pair(&key, &ct)?;
    let plain = cipher::decrypt(&ct, &key)?;
    write_output(a.out.as_deref(), &plain)?;
    Ok(EXIT_OK)
}
