#!/usr/bin/env python3
# Copyright (c) 2026 The ctcrewrite Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Builds the shipped desk-scale resources under data/.

Inputs (not shipped): the CMU pronouncing dictionary (cmudict.dict), the
wordfreq small_en frequency list, and the US census name lists. Outputs:

  lexicon.tsv           word<TAB>phonemes<TAB>frequency (X-SAMPA)
  wpm.vocab             one wordpiece per line, BPE-trained on the lexicon
  contacts.txt apps.txt songs.txt   entity pools
  anti_queries.txt      general voice-query stand-ins
"""

import argparse
import collections
import gzip
import math
import os
import random
import re

import msgpack

ARPABET_TO_XSAMPA = {
    'AA': 'A', 'AE': '{', 'AH': 'V', 'AO': 'O', 'AW': 'aU', 'AY': 'aI',
    'EH': 'E', 'ER': '@`', 'EY': 'eI', 'IH': 'I', 'IY': 'i', 'OW': 'oU',
    'OY': 'OI', 'UH': 'U', 'UW': 'u', 'B': 'b', 'CH': 'tS', 'D': 'd',
    'DH': 'D', 'F': 'f', 'G': 'g', 'HH': 'h', 'JH': 'dZ', 'K': 'k', 'L': 'l',
    'M': 'm', 'N': 'n', 'NG': 'N', 'P': 'p', 'R': 'r\\', 'S': 's', 'SH': 'S',
    'T': 't', 'TH': 'T', 'V': 'v', 'W': 'w', 'Y': 'j', 'Z': 'z', 'ZH': 'Z',
}

WORD_START = '▁'

APPS = """
photo editor|pocket radar|weather channel|music player|voice recorder|
daily planner|fitness tracker|sleep timer|recipe box|travel guide|
flight tracker|bank manager|news reader|video camera|sound meter|
calorie counter|tide chart|star finder|coin collector|garden helper|
paper scanner|word puzzle|chess master|golf score|bird song|
budget book|habit builder|water reminder|parking finder|train times|
bus tracker|podcast player|audio book|language teacher|guitar tuner|
piano lessons|drum machine|night light|baby monitor|pet diary|
movie night|ticket master|home control|smart lock|light switch|
family locator|grocery list|meal planner|wine cellar|coffee finder|
yoga studio|running coach|swim log|bike map|trail finder|
snow report|surf forecast|moon phase|sky guide|cloud storage|
file manager|password keeper|secure notes|team chat|mail box|
calendar sync|alarm clock|world clock|stop watch|unit converter|
tip calculator|currency exchange|stock market|crypto wallet|shopping cart
"""

SONGS = """
golden river|broken window|summer rain|midnight train|silver moon|
dancing shadows|lonely highway|burning bridges|sweet caroline|ocean eyes|
wild horses|paper planes|purple rain|yellow submarine|blue velvet|
fire and rain|stand by me|hotel room|city lights|morning glory|
black magic|white wedding|hungry heart|simple man|free bird|
dream on|bad moon rising|heart of glass|crazy train|river deep|
northern lights|southern nights|eastern promise|western skies|
electric feel|magnetic fields|gravity falls|thunder road|lightning crashes|
falling slowly|running up that hill|walking on sunshine|sailing away|
flying high|country roads|mountain music|desert rose|forest fire|
island girl|harbor lights|autumn leaves|winter song|spring fever|
sunday morning|monday blues|friday night|saturday sun|weekend warrior|
little lies|big yellow taxi|young americans|old friends|new york state|
heavy metal|soft rock|easy money|hard times|cold water|warm blanket
"""

ANTI_QUERIES = """
what is the weather today
how tall is the empire state building
set a timer for ten minutes
what time is it in london
turn off the kitchen lights
how many ounces in a cup
remind me to buy milk
what is the capital of france
tell me a joke
who won the game last night
how far is the moon
what is the news today
play some music
play the latest news
play something relaxing
play the radio
open the garage door
open the front gate
open my calendar
call me a taxi
call my mother
call the doctor
navigate to the nearest gas station
how do you spell necessary
what is two plus two
translate hello into spanish
find a pizza place near me
when does the store close
how long to cook rice
what is the speed of light
add eggs to my shopping list
set an alarm for seven
turn up the volume
stop the music
what movies are playing tonight
is it going to rain tomorrow
how old is the president
what does the fox say
show me pictures of dogs
who wrote romeo and juliet
read my messages
send a message to work
what is my schedule for tomorrow
how many calories in an apple
where is the closest pharmacy
play the next song
open the window
call customer service
play hard time
play old friend
play cold weather
play the purple game
play summer train
play silver moons
play city light
open the weather channel guide
open the sound metre
open my sleep timer app
open the night lights
call the bank manager
call my family
play country road songs
play northern light music
play simple men
play heavy metal music
play a little lie
open the golf course
open the movie tonight
"""


def load_cmudict(path):
  prons = collections.OrderedDict()
  with open(path) as f:
    for line in f:
      line = line.split('#')[0].strip()
      if not line:
        continue
      head, *phones = line.split()
      word = re.sub(r'\(\d+\)$', '', head)
      if not re.fullmatch(r'[a-z]+', word):
        continue
      xs = [ARPABET_TO_XSAMPA[re.sub(r'\d', '', p)] for p in phones]
      # Unstressed AH is schwa.
      xs = ['@' if p == 'AH0' else x for p, x in zip(phones, xs)]
      prons.setdefault(word, [])
      if xs not in prons[word]:
        prons[word].append(xs)
  return prons


def load_wordfreq(path):
  buckets = msgpack.load(gzip.open(path), raw=False)
  freq = {}
  for i, bucket in enumerate(buckets[1:], start=1):
    for w in bucket:
      freq.setdefault(w, 10 ** (-i / 100))
  return freq


def load_census(path, lo, hi):
  names = []
  with open(path) as f:
    for rank, line in enumerate(f):
      if lo <= rank < hi:
        names.append(line.split()[0].lower())
  return names


def train_bpe(words, num_merges):
  """Frequency-weighted BPE; word-initial symbols carry the marker."""
  corpus = {}
  for w, weight in words.items():
    syms = (WORD_START + w[0],) + tuple(w[1:])
    corpus[syms] = corpus.get(syms, 0) + weight
  vocab = set()
  for w in words:
    for ch in w:
      vocab.add(ch)
      vocab.add(WORD_START + ch)
  for ch in 'abcdefghijklmnopqrstuvwxyz':
    vocab.add(ch)
    vocab.add(WORD_START + ch)
  for _ in range(num_merges):
    pairs = collections.Counter()
    for syms, weight in corpus.items():
      for a, b in zip(syms, syms[1:]):
        pairs[a, b] += weight
    if not pairs:
      break
    (a, b), _ = max(pairs.items(), key=lambda kv: (kv[1], kv[0]))
    merged = a + b
    vocab.add(merged)
    new_corpus = {}
    for syms, weight in corpus.items():
      out = []
      i = 0
      while i < len(syms):
        if i + 1 < len(syms) and syms[i] == a and syms[i + 1] == b:
          out.append(merged)
          i += 2
        else:
          out.append(syms[i])
          i += 1
      t = tuple(out)
      new_corpus[t] = new_corpus.get(t, 0) + weight
    corpus = new_corpus
  return sorted(vocab)


def split_list(text):
  return [s.strip() for s in text.replace('\n', '').split('|') if s.strip()]


def main():
  ap = argparse.ArgumentParser()
  ap.add_argument('--cmudict', required=True)
  ap.add_argument('--wordfreq', required=True)
  ap.add_argument('--census_dir', required=True)
  ap.add_argument('--out', required=True)
  ap.add_argument('--general_words', type=int, default=4000)
  ap.add_argument('--contacts', type=int, default=400)
  ap.add_argument('--merges', type=int, default=1500)
  ap.add_argument('--seed', type=int, default=20240917)
  args = ap.parse_args()
  rng = random.Random(args.seed)

  prons = load_cmudict(args.cmudict)
  freq = load_wordfreq(args.wordfreq)

  lexicon = collections.OrderedDict()

  def add(word, count):
    if word in prons and word not in lexicon:
      lexicon[word] = max(1, int(count))

  ranked = sorted((w for w in freq if re.fullmatch(r'[a-z]+', w)),
                  key=lambda w: -freq[w])
  for w in ranked:
    if len(lexicon) >= args.general_words:
      break
    if len(w) == 1 and w not in ('a', 'i'):
      continue
    add(w, freq[w] * 1e6)

  apps = [a for a in split_list(APPS) if all(t in prons for t in a.split())]
  songs = [s for s in split_list(SONGS) if all(t in prons for t in s.split())]
  queries = [q.strip() for q in ANTI_QUERIES.strip().splitlines()
             if all(t in prons for t in q.split())]
  for phrase in apps + songs + queries + ['call', 'open', 'play', 'please']:
    for t in phrase.split():
      add(t, freq.get(t, 1e-6) * 1e6)

  first = (load_census(os.path.join(args.census_dir, 'dist.female.first'),
                       150, 1500) +
           load_census(os.path.join(args.census_dir, 'dist.male.first'),
                       100, 900))
  last = load_census(os.path.join(args.census_dir, 'dist.all.last'),
                     300, 6000)
  first = sorted({n for n in first if n in prons and len(n) >= 4})
  last = sorted({n for n in last if n in prons and len(n) >= 5})
  contacts = set()
  while len(contacts) < args.contacts:
    contacts.add(rng.choice(first) + ' ' + rng.choice(last))
  contacts = sorted(contacts)
  for c in contacts:
    for t in c.split():
      add(t, freq.get(t, 1e-6) * 1e6)

  os.makedirs(args.out, exist_ok=True)
  with open(os.path.join(args.out, 'lexicon.tsv'), 'w') as f:
    for w, count in lexicon.items():
      for p in prons[w][:2]:
        f.write(f'{w}\t{" ".join(p)}\t{count}\n')

  weights = {w: 1.0 + math.log(c) for w, c in lexicon.items()}
  vocab = train_bpe(weights, args.merges)
  with open(os.path.join(args.out, 'wpm.vocab'), 'w') as f:
    for piece in vocab:
      f.write(piece + '\n')

  def title(s):
    return ' '.join(t.capitalize() for t in s.split())

  for name, items in (('contacts.txt', contacts), ('apps.txt', apps),
                      ('songs.txt', songs)):
    with open(os.path.join(args.out, name), 'w') as f:
      for it in items:
        f.write(title(it) + '\n')
  with open(os.path.join(args.out, 'anti_queries.txt'), 'w') as f:
    for q in queries:
      f.write(q + '\n')
  print(f'lexicon {len(lexicon)} words, vocab {len(vocab)} pieces, '
        f'{len(contacts)} contacts, {len(apps)} apps, {len(songs)} songs, '
        f'{len(queries)} queries')


if __name__ == '__main__':
  main()
