#!/usr/bin/env python3
"""Regenerates the shipped timetable-domain fixtures under data/.

Output is deterministic: the same script always writes byte-identical files.

    python3 tools/gen_fixtures.py data/
"""

import datetime
import random
import sys
from pathlib import Path

CITIES = [
    "milan", "rome", "turin", "naples", "florence", "venice",
    "bologna", "genoa", "bari", "palermo", "verona", "pisa",
]
STATION_SUFFIXES = ["central", "north", "south"]

CARDINALS = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight",
    "nine", "ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen",
    "sixteen", "seventeen", "eighteen", "nineteen", "twenty",
    "twenty-one", "twenty-two", "twenty-three", "twenty-four", "twenty-five",
    "twenty-six", "twenty-seven", "twenty-eight", "twenty-nine", "thirty",
    "thirty-one",
]
ORDINALS = [
    "first", "second", "third", "fourth", "fifth", "sixth", "seventh",
    "eighth", "ninth", "tenth", "eleventh", "twelfth", "thirteenth",
    "fourteenth", "fifteenth", "sixteenth", "seventeenth", "eighteenth",
    "nineteenth", "twentieth", "twenty-first", "twenty-second",
    "twenty-third", "twenty-fourth", "twenty-fifth", "twenty-sixth",
    "twenty-seventh", "twenty-eighth", "twenty-ninth", "thirtieth",
    "thirty-first",
]
NUMBER_EXTRA = [
    "thirty-five", "forty", "forty-five", "fifty", "fifty-five", "sixty",
    "hundred", "thousand", "million", "half", "quarter", "oh", "dozen",
]
MONTHS = [
    "january", "february", "march", "april", "may", "june", "july",
    "august", "september", "october", "november", "december",
]
WEEKDAYS = ["monday", "tuesday", "wednesday", "thursday", "friday",
            "saturday", "sunday"]
DAYPARTS = ["morning", "afternoon", "evening", "night"]

SEMANTIC = [
    ("city", "city", None),
    ("station", "station", None),
    ("number", "number", CARDINALS + ORDINALS + NUMBER_EXTRA),
    ("month", "month", MONTHS),
    ("weekday", "weekday", WEEKDAYS),
    ("daypart", "daypart", DAYPARTS),
    ("affirm", "affirm", ["yes", "yeah"]),
    ("negate", "negate", ["no", "nope"]),
    ("relday", "relday", ["today", "tomorrow"]),
    ("meridiem", "meridiem", ["am", "pm"]),
]

# Function words and domain words first; the grammar and the user simulator
# depend on these being present.
CORE_SINGLETONS = """
from to at on in the of leaving leave depart departing going go arrive
arriving i want would like a an train trains please for travel that is right
correct said not but instead actually wrong thanks thank you goodbye bye
what when where time day oclock me my it this there and or so um uh er well
okay ok hello hi good can could tell need get be are was do does did have
has how which will shall should just only also then now later early
late next last every around about before after by with without
ticket tickets return one-way single journey trip connection connections
schedule timetable departure departures arrival arrivals platform station
stations city cities leaves arrives take taking book booking reserve seat
class fare fares price cost direct change changes stop stops fast slow
express regional intercity hour hours minute minutes week weekend date
""".split()

FILLER_SINGLETONS = """
able above across again against ago ahead air all almost alone along already
although always among another answer any anybody anyone anything anyway
anywhere area ask asked away back bad bag bags because been being below best
better between big bit both bring brother busy buy call called came car care
carry case cause certain chance check child children clear close cold come
coming company couple course cousin dad dear different dinner does
doing done door down drive during each easy eat either else end enough even
ever everyone everything exactly family far father feel few find
fine finish floor friend friends front full game gave give given
glad goes gone got great ground group guess half-past hand happen happy hard
head hear heard help her here herself high him himself his hold holiday home
hope hotel house however hundreds idea if important inside interested into
its itself job keep kind knew know known large least less let
letter life light line list little live long look looking lot love low made
make making man many maybe mean meet meeting might mind mine miss mom money
more most mother move much must myself name near never new news nice
nobody none nor nothing nurse off office often old once open other
our out outside over own paper part party pass past pay people perhaps person
phone pick place plan plans play point possible probably problem put quick
quite rather read ready really reason remember rest rich road room run
same saw say says school see seem seen send sent set she short show side
since sister sit small some somebody someone something sometimes soon sorry
speak start still stay street such sure system talk than their them
themselves these they thing things think those though thought through till
together told too took town tried trying turn under until upon us use used
usual very visit wait waiting walk wanted wants water way we weather went
were while who whole whom whose why wife window wish woman work world worry
year years yesterday yet young your yourself
""".split()

SYLLABLES = [
    "ba", "be", "bi", "bo", "bu", "ca", "ce", "ci", "co", "da", "de", "di",
    "do", "fa", "fe", "fi", "fo", "ga", "go", "la", "le", "li", "lo", "lu",
    "ma", "me", "mi", "mo", "na", "ne", "ni", "no", "pa", "pe", "pi", "po",
    "ra", "re", "ri", "ro", "sa", "se", "si", "so", "ta", "te", "ti", "to",
    "va", "ve", "vi", "vo", "za", "zo",
]
CODAS = ["", "", "", "n", "r", "l", "s", "nto", "no", "lla", "ssa", "ra"]

N_WORDS = 3471
N_CLASSES = 358
N_CITY = 2983
REFERENCE_DATE = datetime.date(2024, 5, 10)


def synthetic_cities(rng, taken, count):
    out = []
    seen = set(taken)
    while len(out) < count:
        n = rng.choice([2, 3, 3, 4])
        name = "".join(rng.choice(SYLLABLES) for _ in range(n)) + rng.choice(CODAS)
        if name in seen:
            continue
        seen.add(name)
        out.append(name)
    return out


def build_lexicon():
    rng = random.Random(1994)
    entries = []  # (word, class_id, tag)
    used = set()

    def add(word, cls, tag):
        assert word not in used, word
        used.add(word)
        entries.append((word, cls, tag))

    stations = []
    for city in CITIES[:11]:
        for suffix in STATION_SUFFIXES:
            stations.append(f"{city}_{suffix}")

    semantic_words = set()
    for _, _, words in SEMANTIC:
        if words:
            semantic_words.update(words)
    semantic_words.update(CITIES)

    singletons = []
    for w in CORE_SINGLETONS + FILLER_SINGLETONS:
        if w in semantic_words or w in singletons:
            continue
        singletons.append(w)
    n_single = N_CLASSES - len(SEMANTIC)
    assert len(singletons) >= n_single, len(singletons)
    singletons = singletons[:n_single]

    taken = set(singletons) | semantic_words
    cities = CITIES + synthetic_cities(rng, taken, N_CITY - len(CITIES))

    for w in singletons:
        add(w, "w:" + w, None)
    for cls, tag, words in SEMANTIC:
        if cls == "city":
            words = cities
        elif cls == "station":
            words = stations
        for w in words:
            add(w, cls, tag)

    assert len(entries) == N_WORDS, len(entries)
    return entries


def time_str(minutes):
    return f"{minutes // 60:02d}:{minutes % 60:02d}"


def build_timetable():
    rng = random.Random(7)
    pairs = []
    # ring plus chords: every city departs and arrives somewhere
    n = len(CITIES)
    for i in range(n):
        pairs.append((CITIES[i], CITIES[(i + 1) % n]))
        pairs.append((CITIES[(i + 1) % n], CITIES[i]))
    for i in range(0, n, 2):
        pairs.append((CITIES[i], CITIES[(i + 5) % n]))
    assert len(pairs) == 30
    rows = []
    for dep, arr in pairs:
        morning = rng.randrange(6 * 60, 10 * 60, 5)
        dur = rng.randrange(60, 300, 5)
        rows.append((dep, arr, morning, morning + dur, "1234567", 1))
        later = rng.randrange(13 * 60, 21 * 60, 5)
        dur = rng.randrange(60, 240, 5)
        days = rng.choice(["12345", "1234567", "123456"])
        rows.append((dep, arr, later, min(later + dur, 23 * 60 + 55), days, 0))
    return rows


def daypart_of(minutes):
    if minutes < 12 * 60:
        return "morning"
    if minutes < 18 * 60:
        return "afternoon"
    if minutes < 22 * 60:
        return "evening"
    return "night"


def build_scenarios(rows):
    rng = random.Random(11)
    out = []
    used = set()
    while len(out) < 20:
        row = rng.choice(rows)
        dep, arr, t, _, days, _ = row
        if (dep, arr) in used:
            continue
        candidates = []
        for k in range(1, 8):
            d = REFERENCE_DATE + datetime.timedelta(days=k)
            if str(d.isoweekday()) in days:
                candidates.append(d)
        date = rng.choice(candidates)
        if rng.random() < 0.5:
            goal_time = daypart_of(t)
        else:
            goal_time = f"{t // 60:02d}:00"
        used.add((dep, arr))
        call = ("scripted", "scripted", "free")[len(out) % 3]
        out.append((f"sc{len(out) + 1:02d}", dep, arr, date.isoformat(),
                    goal_time, call))
    return out


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "data")
    out.mkdir(parents=True, exist_ok=True)

    entries = build_lexicon()
    with open(out / "lexicon.tsv", "w") as f:
        f.write("# timetable-domain lexicon: word<TAB>class_id<TAB>semantic_tag\n")
        f.write(f"# {N_WORDS} words, {N_CLASSES} classes\n")
        for word, cls, tag in entries:
            f.write(f"{word}\t{cls}\t{tag}\n" if tag else f"{word}\t{cls}\n")

    rows = build_timetable()
    with open(out / "timetable.csv", "w") as f:
        f.write("# dep_city,arr_city,dep_time,arr_time,days,main_flag\n")
        for dep, arr, t0, t1, days, main in rows:
            f.write(f"{dep},{arr},{time_str(t0)},{time_str(t1)},{days},{main}\n")

    with open(out / "scenarios.tsv", "w") as f:
        f.write("# id\tdeparture\tarrival\tdate\ttime\tcall\n")
        for sc in build_scenarios(rows):
            f.write("\t".join(sc) + "\n")


if __name__ == "__main__":
    main()
