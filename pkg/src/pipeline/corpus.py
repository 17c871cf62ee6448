"""Synthetic survey corpus with the causal structure of the real data.

Each topic has phrases its rule recognises and paraphrases no rule
recognises. A document draws one to ``max_labels`` topics and is rendered
either entirely from rule-matching phrases (probability ``regex_fraction``)
or entirely from paraphrases. Off-topic texts match no rule and carry no
label; a corpus may mix in a fraction of them as unlabeled documents.
The phrase tables are written against ``configs/rulebook.tsv``.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from src.errors import InvalidParameterError
from src.rules.rulebook import NUM_TOPICS, TopicRuleSet
from src.training.data import LabeledSample

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TopicPhrases:
    regex: tuple[str, ...]
    paraphrase: tuple[str, ...]


TOPIC_PHRASES: dict[int, TopicPhrases] = {
    0: TopicPhrases(
        regex=(
            "I could not understand the agent at all",
            "it was hard to understand what the rep was saying",
            "the agent mumbled through the whole call",
        ),
        paraphrase=(
            "the explanations I received were garbled and unclear",
            "I kept asking the person to repeat every sentence",
        ),
    ),
    1: TopicPhrases(
        regex=(
            "the agent was very knowledgeable",
            "she did not know the answer to a simple question",
            "he answered all my questions quickly",
        ),
        paraphrase=(
            "the staff member clearly understood my plan inside and out",
            "the person seemed unsure about basic details of my benefits",
        ),
    ),
    2: TopicPhrases(
        regex=(
            "my call was routed to an offshore call centre",
            "the support desk seems to be overseas",
            "you outsourced your support line",
        ),
        paraphrase=(
            "the representative was clearly located in another country",
            "it felt like I was talking to a foreign contractor",
        ),
    ),
    3: TopicPhrases(
        regex=(
            "the agent was rude to me",
            "she had a condescending tone",
            "he had a terrible attitude",
        ),
        paraphrase=(
            "the person on the line was dismissive and short with me",
            "he hung up on me without saying goodbye",
        ),
    ),
    4: TopicPhrases(
        regex=(
            "you provide excellent customer service",
            "the service was terrible",
            "honestly it was outstanding service",
        ),
        paraphrase=(
            "the help I received was top notch",
            "the support I got was subpar",
        ),
    ),
    5: TopicPhrases(
        regex=(
            "I cannot log in to the app",
            "the app would not let me sign in",
            "I am unable to login to your mobile app",
        ),
        paraphrase=(
            "my phone application keeps rejecting my credentials",
            "the mobile tool refuses my username every morning",
        ),
    ),
    6: TopicPhrases(
        regex=(
            "the app is confusing",
            "navigating the mobile app is a chore",
            "the app layout makes no sense",
        ),
        paraphrase=(
            "the buttons on my phone screen are impossible to find",
            "menus on the smartphone tool are a maze",
        ),
    ),
    7: TopicPhrases(
        regex=(
            "there was a choppy phone line",
            "I could not hear the agent",
            "my call dropped twice",
        ),
        paraphrase=(
            "the voice on the other end kept cutting out",
            "there was a loud buzzing the whole time",
        ),
    ),
    8: TopicPhrases(
        regex=(
            "I was transferred to another department",
            "they kept transferring me",
            "the transfer took forever",
        ),
        paraphrase=(
            "I was passed from one person to another",
            "I got bounced between three departments",
        ),
    ),
    9: TopicPhrases(
        regex=(
            "I called several times",
            "I had to call again",
            "I kept calling for a week",
        ),
        paraphrase=(
            "this is my fourth attempt to reach someone",
            "I phoned again and again",
        ),
    ),
    10: TopicPhrases(
        regex=(
            "the automated system was useless",
            "the phone menu goes in circles",
            "I had to press two for claims",
        ),
        paraphrase=(
            "the robot voice never understood my answers",
            "I spent ten minutes talking to a recording",
        ),
    ),
    11: TopicPhrases(
        regex=(
            "nobody called me back",
            "there was no follow up after my inquiry",
            "they promised to get back to me and never did",
        ),
        paraphrase=(
            "I am still waiting to hear from anyone",
            "I asked for my coverage details by email which still was not done",
        ),
    ),
    12: TopicPhrases(
        regex=(
            "there was a language barrier",
            "the agent had a thick accent",
            "the representative did not speak english",
        ),
        paraphrase=(
            "we could barely communicate in the same tongue",
            "his grasp of my language was very limited",
        ),
    ),
    13: TopicPhrases(
        regex=(
            "they were unable to resolve my problem",
            "my issue is still unresolved",
            "the agent could not fix my problem",
        ),
        paraphrase=(
            "the problem remains exactly where it started",
            "I hung up with the same issue I called about",
        ),
    ),
    14: TopicPhrases(
        regex=(
            "I tried to submit my claim online",
            "the online claim form kept failing",
            "filing a claim online was impossible",
        ),
        paraphrase=(
            "uploading receipts through the web was a nightmare",
            "sending my paperwork over the internet failed twice",
        ),
    ),
    15: TopicPhrases(
        regex=(
            "the claims process is too complicated",
            "my claim took weeks to process",
            "the processing time is ridiculous",
        ),
        paraphrase=(
            "getting money back for a visit involves too many steps",
            "the paperwork required after a dental visit is endless",
        ),
    ),
    16: TopicPhrases(
        regex=(
            "my claim was denied",
            "you rejected my claim",
            "the claims were declined without reason",
        ),
        paraphrase=(
            "the answer on my dental bill was a flat no",
            "I was refused payment for my glasses",
        ),
    ),
    17: TopicPhrases(
        regex=(
            "I wanted to check the status of my claim",
            "the claim status page is blank",
            "I have been waiting on a decision for a month",
        ),
        paraphrase=(
            "nobody can tell me where my paperwork stands",
            "I have no idea whether my submission was approved",
        ),
    ),
    18: TopicPhrases(
        regex=(
            "I am still waiting for my reimbursement",
            "the claim payment never arrived",
            "they reimbursed only half",
        ),
        paraphrase=(
            "the money for my physiotherapy never showed up in my account",
            "I was paid far less than I expected",
        ),
    ),
    19: TopicPhrases(
        regex=(
            "my massage therapy is not covered",
            "what is the coverage limit for dental",
            "my plan does not cover glasses",
        ),
        paraphrase=(
            "I wanted to know what my benefits include",
            "I was surprised my prescriptions are excluded",
        ),
    ),
    20: TopicPhrases(
        regex=(
            "I could not log in to the website",
            "I got locked out of my online account",
            "I cannot sign in to the portal",
        ),
        paraphrase=(
            "my username and code are never accepted on your web page",
            "the site refuses my credentials",
        ),
    ),
    21: TopicPhrases(
        regex=(
            "I am not very tech savvy",
            "I am not good with computers",
            "my mother is computer illiterate",
        ),
        paraphrase=(
            "I struggle with anything digital",
            "my grandson has to help me with the internet",
        ),
    ),
    22: TopicPhrases(
        regex=(
            "the website is easy to use",
            "the portal was really difficult to use",
            "the site is so hard to use",
        ),
        paraphrase=(
            "your web pages are simple to get around",
            "the online tools were painless to work with",
        ),
    ),
    23: TopicPhrases(
        regex=(
            "I could not find the information on the website",
            "the portal has no details",
            "the site lacks information about deductibles",
        ),
        paraphrase=(
            "the web pages say nothing about my deductible",
            "answers to basic questions are missing online",
        ),
    ),
    24: TopicPhrases(
        regex=(
            "the website is not user friendly",
            "the portal layout is cluttered",
            "navigating the site is painful",
        ),
        paraphrase=(
            "the buttons on your web pages are in odd places",
            "the pages look cluttered and old fashioned",
        ),
    ),
    25: TopicPhrases(
        regex=(
            "I had to reset my password three times",
            "my password was not accepted",
            "I forgot my password",
        ),
        paraphrase=(
            "my secret code stopped working",
            "the login phrase I chose is never recognised",
        ),
    ),
    26: TopicPhrases(
        regex=(
            "the website crashed twice",
            "the portal is slow to load",
            "there was a lot of downtime",
        ),
        paraphrase=(
            "pages take a very long time to appear",
            "the web pages freeze constantly",
        ),
    ),
}

FILLERS = (
    "I have been a member for six years",
    "I usually contact you by phone",
    "overall I am a loyal customer",
    "my plan renews every spring",
    "this is my first time writing feedback",
    "I hope this feedback helps",
)

OFF_TOPIC = (
    "the parking near your city office is limited",
    "please send me a paper copy of the newsletter",
    "I would like to update my mailing address",
    "the holiday greeting card was a nice touch",
    "I saw your advertisement on television last night",
    "my daughter starts university in the fall",
    "the weather during my visit to your branch was lovely",
    "can you add a vegetarian option to the wellness seminar",
    "the lobby music at the head office is pleasant",
    "I would like information about volunteering at your charity run",
)

OPENERS = ("", "honestly ", "to be frank ", "unfortunately ")
CLOSERS = ("", " last week", " this month", " again")

FILLER_PROBABILITY = 0.5


def _pick(rng: np.random.Generator, options: Sequence[str]) -> str:
    return options[int(rng.integers(len(options)))]


def _render(rng: np.random.Generator, phrase: str) -> str:
    return f"{_pick(rng, OPENERS)}{phrase}{_pick(rng, CLOSERS)}"


def join_sentences(sentences: Sequence[str]) -> str:
    """Capitalise and join with ". " so no pattern can span two sentences."""
    return ". ".join(s[:1].upper() + s[1:] for s in sentences) + "."


def _off_topic_sample(rng: np.random.Generator, doc_id: str) -> LabeledSample:
    n = int(rng.integers(1, 3))
    picks = rng.choice(len(OFF_TOPIC), size=n, replace=False)
    text = join_sentences([OFF_TOPIC[int(j)] for j in picks])
    return LabeledSample(doc_id=doc_id, text=text, labels=frozenset())


def generate_corpus(
    rules: TopicRuleSet,
    size: int = 400,
    regex_fraction: float = 0.75,
    seed: int = 7,
    max_labels: int = 2,
    id_prefix: str = "s",
    off_topic_fraction: float = 0.0,
) -> list[LabeledSample]:
    """Render ``size`` survey responses.

    ``off_topic_fraction`` of them are unlabeled off-topic texts; the rest
    carry one to ``max_labels`` topics.
    """
    if size < 0:
        raise InvalidParameterError("size", size, "a non-negative count")
    if not 0.0 <= regex_fraction <= 1.0:
        raise InvalidParameterError("regex_fraction", regex_fraction, "a value in [0, 1]")
    if not 0.0 <= off_topic_fraction <= 1.0:
        raise InvalidParameterError(
            "off_topic_fraction", off_topic_fraction, "a value in [0, 1]"
        )
    if not 1 <= max_labels <= NUM_TOPICS:
        raise InvalidParameterError("max_labels", max_labels, f"an integer in [1, {NUM_TOPICS}]")

    rng = np.random.default_rng(seed)
    samples = []
    regex_docs = off_topic_docs = 0
    for i in range(size):
        if off_topic_fraction > 0.0 and rng.random() < off_topic_fraction:
            off_topic_docs += 1
            samples.append(_off_topic_sample(rng, f"{id_prefix}{i:04d}"))
            continue
        n_topics = int(rng.integers(1, max_labels + 1))
        topics = sorted(int(t) for t in rng.choice(NUM_TOPICS, size=n_topics, replace=False))
        from_rules = bool(rng.random() < regex_fraction)
        regex_docs += from_rules

        sentences = []
        for t in topics:
            phrases = TOPIC_PHRASES[t]
            pool = phrases.regex if from_rules else phrases.paraphrase
            sentences.append(_render(rng, _pick(rng, pool)))
        if rng.random() < FILLER_PROBABILITY:
            sentences.append(_render(rng, _pick(rng, FILLERS)))
        order = rng.permutation(len(sentences))

        samples.append(
            LabeledSample(
                doc_id=f"{id_prefix}{i:04d}",
                text=join_sentences([sentences[j] for j in order]),
                labels=frozenset(rules.name_of(t) for t in topics),
            )
        )

    logger.info(
        "Generated %d synthetic samples (%d rendered from rule phrases, %d off-topic)",
        size,
        regex_docs,
        off_topic_docs,
    )
    return samples


def generate_emerging(size: int = 50, seed: int = 7, id_prefix: str = "e") -> list[LabeledSample]:
    """Unlabeled off-topic responses of one or two sentences."""
    rng = np.random.default_rng(seed)
    return [_off_topic_sample(rng, f"{id_prefix}{i:04d}") for i in range(size)]


def multi_topic_text(topic_ids: Sequence[int]) -> str:
    """One rule-matching sentence for each of ``topic_ids``."""
    return join_sentences([TOPIC_PHRASES[t].regex[0] for t in topic_ids])
