/**
 * FNV-1a (64 bit) over the raw response text. Fast, dependency-free, and
 * plenty for spotting "did the server answer change" within a session;
 * this is a fingerprint, not a cryptographic hash.
 */

const FNV_OFFSET = 0xcbf29ce484222325n;
const FNV_PRIME = 0x100000001b3n;
const MASK64 = 0xffffffffffffffffn;

export function fnv1a64(text: string): string {
    let hash = FNV_OFFSET;
    const bytes = new TextEncoder().encode(text);
    for (const b of bytes) {
        hash ^= BigInt(b);
        hash = (hash * FNV_PRIME) & MASK64;
    }
    return hash.toString(16).padStart(16, '0');
}
