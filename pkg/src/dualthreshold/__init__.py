"""Threshold-generated, threshold-verified digital signatures.

A t-of-n subset of a sending organization jointly signs a message; a k-of-l
subset of the receiving organization is needed before the signature can even
be checked.  The package provides the group arithmetic, secret sharing,
masked share distribution, signing and verification sessions, a message-level
protocol simulator with replayable transcripts, and executable security
experiments.
"""

from .analysis import (
    ExperimentReport,
    binomial_interval,
    collusion_reconstruct,
    forgery_experiment,
    impersonation_experiment,
    tamper_experiment,
)
from .ctc import (
    Ledger,
    LedgerRecord,
    OrgPublic,
    OrgSetup,
    SignatureBundle,
    adjudicate,
    aggregate_partials,
    emit_bundle,
    setup_organization,
)
from .groupmath import (
    GroupParams,
    ValidationReport,
    derive_generator,
    generate_params,
    lagrange_coeff_zero,
    mod_exp,
    mod_inv,
    validate_params,
)
from .hashing import ChallengeHash, canonical_encode, hash_to_scalar
from .protocol import (
    ChannelMessage,
    ProtocolAbort,
    SessionConfig,
    Transcript,
    TranscriptError,
    replay_transcript,
    run_signing_session,
    run_verification_session,
)
from .shamir import (
    SecretPolynomial,
    Share,
    eval_poly,
    reconstruct_polynomial,
    reconstruct_zero,
    sample_polynomial,
)
from .shares import (
    MaskedShare,
    Member,
    ModifiedShadow,
    RosterEntry,
    ShareRecoveryError,
    mask_share,
    modified_shadow,
    recover_share,
)
from .signing import (
    NonceCommitment,
    PartialSignature,
    SignerSession,
    aggregate_commitments,
    compute_challenge,
    make_nonce_commitment,
    partial_sign,
    schnorr_sign,
    schnorr_verify,
)
from .verification import (
    VerificationSession,
    Verdict,
    combine_shadows,
    recover_commitment,
    verify_bundle,
)

__version__ = "0.1.0"
