"""Small reversible generator machines used by tests and examples.

All follow the standard layout: tape 0 is the input tape holding the random
seed bits with a blank on either side and the head starting on the right
blank; tape 1 is the output tape.
"""

TRIVIAL_1BIT = """\
# halts immediately; one seed bit, empty output
tapes 2
blank _
alphabet 0 1 _
states A
start A
"""

COPY_1BIT = """\
# copies its single seed bit to the output tape (uniform 1-bit sampler)
tapes 2
blank _
alphabet 0 1 _
states A B F0 F1
start A
move  A -> B [L,N]
write B [0,_] -> F0 [0,0]
write B [1,_] -> F1 [1,1]
"""

OR_2BIT = """\
# writes the OR of its two seed bits: samples {0: 1/4, 1: 3/4}
tapes 2
blank _
alphabet 0 1 _
states A B C0 C1 D0 D1 F00 F01 F10 F11
start A
move  A -> B [L,N]
write B [0,_] -> C0 [0,_]
write B [1,_] -> C1 [1,_]
move  C0 -> D0 [L,N]
move  C1 -> D1 [L,N]
write D0 [0,_] -> F00 [0,0]
write D0 [1,_] -> F10 [1,1]
write D1 [0,_] -> F01 [0,1]
write D1 [1,_] -> F11 [1,1]
"""

TOYS = {
    "trivial1": TRIVIAL_1BIT,
    "copy1": COPY_1BIT,
    "or2": OR_2BIT,
}

SEED_BITS = {"trivial1": 1, "copy1": 1, "or2": 2}
