import random

import pytest

from dualthreshold import demo
from dualthreshold.analysis import random_session_config
from dualthreshold.ctc import setup_organization
from dualthreshold.groupmath import GroupParams, generate_params
from dualthreshold.hashing import ChallengeHash
from dualthreshold.protocol import SessionConfig
from dualthreshold.shares import Member


@pytest.fixture
def params47():
    return GroupParams(p=47, q=23, g=2, profile="test")


@pytest.fixture
def demo_config():
    return demo.session_config()


@pytest.fixture(scope="session")
def medium_params():
    # big enough that hash collisions and value coincidences vanish
    return generate_params("test", random.Random(1000), p_bits=128, q_bits=64)


def small_random_config(params, rng, message=b"session message", **kwargs):
    n = rng.randint(1, 7)
    t = rng.randint(1, n)
    l = rng.randint(1, 7)
    k = rng.randint(1, l)
    return random_session_config(params, rng, n, t, l, k, message=message, **kwargs)


def config_with_secrets(params, rng, message):
    """Session config plus the private setup objects, for leak-hunting tests."""
    q = params.q

    def draw_members(org, count):
        ids = set()
        while len(ids) < count:
            ids.add(rng.randrange(1, q))
        return {uid: Member.create(org, uid, rng.randrange(1, q), params) for uid in sorted(ids)}

    s_members = draw_members("S", 4)
    r_members = draw_members("R", 3)
    masking_nonce = rng.randrange(1, q)
    s_setup = setup_organization("S", rng.randrange(1, q), 3,
                                 [m.public_part() for m in s_members.values()],
                                 masking_nonce, params, rng)
    r_setup = setup_organization("R", rng.randrange(1, q), 2,
                                 [m.public_part() for m in r_members.values()],
                                 masking_nonce, params, rng)
    signer_ids = tuple(sorted(s_members))[:3]
    verifier_ids = tuple(sorted(r_members))[:2]
    nonces = {uid: (rng.randrange(1, q), rng.randrange(1, q)) for uid in signer_ids}
    config = SessionConfig(
        params=params,
        challenge_hash=ChallengeHash.production(),
        signer_org=s_setup.public,
        recipient_org=r_setup.public,
        signer_members=s_members,
        recipient_members=r_members,
        signer_ids=signer_ids,
        verifier_ids=verifier_ids,
        dc_id=verifier_ids[0],
        message=message,
        fixed_nonces=nonces,
    )
    return config, s_setup, r_setup, nonces
