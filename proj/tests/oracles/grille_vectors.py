"""Independent reference for the keyed grille stream and fingerprints.

Prints the values frozen in tests/test_grille.cpp.
"""
import hashlib
import math
import struct


def derive(key: bytes, rows: int, cols: int, density: float):
    threshold = math.floor(density * 256)
    stream = b""
    counter = 0
    while len(stream) < rows * cols:
        stream += hashlib.sha256(key + struct.pack(">Q", counter)).digest()
        counter += 1
    return [[1 if stream[r * cols + c] < threshold else 0 for c in range(cols)] for r in range(rows)]


def fingerprint(cells, height, width):
    data = struct.pack("<II", height, width) + bytes(v for row in cells for v in row)
    return hashlib.sha256(data).hexdigest()[:16]


def pad(grille, height, width):
    a, b = len(grille), len(grille[0])
    r0, c0 = (height - a) // 2, (width - b) // 2
    out = [[0] * width for _ in range(height)]
    for r in range(a):
        for c in range(b):
            out[r0 + r][c0 + c] = grille[r][c]
    return out


if __name__ == "__main__":
    g = derive(b"cardan", 8, 8, 0.5)
    print("8x8 key 'cardan' d=0.5:")
    for row in g:
        print("".join(map(str, row)))
    g40 = derive(b"cardan", 5, 9, 0.25)
    print("5x9 key 'cardan' d=0.25:")
    for row in g40:
        print("".join(map(str, row)))
    print("fingerprint 8x8 in 16x16:", fingerprint(pad(g, 16, 16), 16, 16))
    target = [[1, 0, 1], [0, 1, 0], [1, 0, 1]]
    for i in range(1 << 20):
        key = b"k%d" % i
        if derive(key, 3, 3, 0.5) == target:
            print("3x3 checkerboard key:", key.decode())
            break
    # 200x1 long column spans several hash blocks
    col = derive(b"\x00\x01\x02", 1, 100, 0.5)[0]
    print("1x100 key 000102 d=0.5:", "".join(map(str, col)))
