"""Closed-form parameter counts and length traces for both architectures.

Values printed here are frozen in tests/acceptance.rs.
"""


def word_params(vocab, d, frames=256, kernels=(3, 4, 5), hidden=150, classes=4):
    emb = vocab * d
    convs = sum(frames * d * k + frames for k in kernels)
    fc1 = len(kernels) * frames * hidden + hidden
    fc2 = hidden * classes + classes
    return emb + convs + fc1 + fc2


def char_lengths(length, layers=((7, 3), (3, None), (3, None), (3, 3))):
    trace = []
    for kernel, pool in layers:
        length = length - kernel + 1
        if length < 1:
            return trace, None
        trace.append(length)
        if pool:
            length //= pool
            if length < 1:
                return trace, None
            trace.append(length)
    return trace, length


def char_params(alphabet, d, length, frames=256, fc=(1024, 1024), classes=4):
    _, final = char_lengths(length)
    convs = frames * d * 7 + frames + 3 * (frames * frames * 3 + frames)
    flat = final * frames
    fc1 = flat * fc[0] + fc[0]
    fc2 = fc[0] * fc[1] + fc[1]
    fc3 = fc[1] * classes + classes
    return alphabet * d + convs + fc1 + fc2 + fc3


print("word d=128 V=5000:", word_params(5000, 128))
print("char L=512:", char_lengths(512), "flatten", char_lengths(512)[1] * 256)
print("char L=11:", char_lengths(11))
print("char L=32:", char_lengths(32))
print("char L=33:", char_lengths(33))
print("char a=256 d=32 L=512:", char_params(256, 32, 512))
