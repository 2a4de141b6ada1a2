#include <array>

#include "safechat/classify.hpp"
#include "safechat/error.hpp"
#include "safechat/rng.hpp"

// Stand-in for the SafeCity corpus: short first-person incident reports built
// from per-type clause banks, and non-harassment short texts (reviews, posts,
// small talk) as the negative pool.
namespace safechat::classify {

namespace {

using Bank = std::vector<std::string_view>;

const Bank kPerpetrators{
    "a man",          "a guy",           "an older man",      "a group of boys", "a stranger",
    "my colleague",   "the driver",      "my neighbour",      "a young man",     "two men",
    "my manager",     "a drunk man",     "the shop owner",    "a classmate",     "some guys",
    "a man on a bike", "the conductor", "a security guard", "my ex",          "a tall man",
};

const Bank kVerbal{
    "{p} made sexual comments about my body",
    "{p} shouted obscene words at me",
    "{p} called me names",
    "{p} passed lewd remarks",
    "{p} kept telling me dirty jokes",
    "{p} asked me for sex",
    "{p} catcalled me",
    "{p} commented on my clothes in a sexual way",
    "{p} insulted me with sexist slurs",
    "{p} kept asking me questions about my sex life",
    "{p} told me what he wanted to do to me",
    "{p} yelled at me using abusive language",
    "{p} made rude comments about my looks",
    "{p} said disgusting things to me",
    "{p} asked me to sleep with him",
    "{p} sang vulgar songs at me",
    "{p} kept calling me baby and sweetheart",
    "{p} made a sexual joke about me in front of everyone",
    "{p} threatened me and used foul language",
    "{p} whispered vulgar words to me",
};

const Bank kNonVerbal{
    "{p} kept staring at me",
    "{p} followed me",
    "{p} was leering at me",
    "{p} took pictures of me without permission",
    "{p} made obscene gestures",
    "{p} winked at me and whistled",
    "{p} showed me his private parts",
    "{p} stalked me for days",
    "{p} exposed himself",
    "{p} sent me explicit pictures",
    "{p} kept looking at my body",
    "{p} masturbated in front of me",
    "{p} was following me home",
    "{p} kept watching me the whole time",
    "{p} filmed me with his phone",
    "{p} showed me porn on his phone",
    "{p} kept gazing at my chest",
    "{p} flashed me",
    "{p} kept following me from shop to shop",
    "{p} made kissing faces at me",
};

const Bank kPhysical{
    "{p} touched me inappropriately",
    "{p} groped me",
    "{p} grabbed my arm",
    "{p} pushed me against the wall",
    "{p} pinched my bottom",
    "{p} tried to kiss me",
    "{p} hugged me without my consent",
    "{p} rubbed against me",
    "{p} pulled my hair",
    "{p} slapped me",
    "{p} held me tightly and would not let go",
    "{p} put his hand on my thigh",
    "{p} assaulted me",
    "{p} hit me",
    "{p} forced himself on me",
    "{p} brushed his hand against my chest",
    "{p} grabbed my waist",
    "{p} touched my breasts",
    "{p} squeezed my hand and pulled me closer",
    "{p} molested me",
};

const Bank kPlaces{
    "at the bus stop", "on the train",       "in the park",        "near the station",
    "at work",         "in a bar",           "on the street",      "in the market",
    "at the university", "in the elevator", "at a party",         "in the metro",
    "outside the club", "in the parking lot", "on my way to school", "in the shop",
    "in Maastricht",   "in Amsterdam",       "in Delhi",           "in Mumbai",
};

const Bank kTimes{
    "yesterday",      "last night",   "in the evening",   "around 9pm", "this morning",
    "two days ago",   "last week",    "in the afternoon", "at night",   "on Sunday",
    "around 8 o'clock", "today",      "a month ago",      "at 11pm",    "last summer",
};

const Bank kOpeners{
    "",
    "",
    "I want to report an incident.",
    "This happened to me recently.",
    "I was walking home alone when",
    "While I was waiting for the bus,",
    "It was a horrible experience.",
    "I need to tell someone about this.",
    "I was on my way back from work and",
    "Something bad happened.",
};

const Bank kClosers{
    "",
    "",
    "I felt scared.",
    "I was so shocked.",
    "Nobody helped me.",
    "I felt humiliated and unsafe.",
    "I ran away.",
    "I did not know what to do.",
    "I am still upset about it.",
    "People around just watched.",
};

// Negative pool: reviews, everyday posts and small talk.
const Bank kNegTemplates{
    "The {product} I bought {when} is {adj}.",
    "I really {liked} the movie, the acting was {adj}.",
    "Just had {food} {where}, {adj}!",
    "The delivery was {adj} and the {product} works fine.",
    "Watching football with friends tonight.",
    "Cannot wait for the weekend trip {where}.",
    "The hotel staff were {adj} and the room was clean.",
    "My {relative} made the best {food} {when}.",
    "This {product} stopped working after two weeks.",
    "Great concert {when}, the band played all their hits.",
    "The man at the counter helped me find a new {product}.",
    "Hello everyone, good morning!",
    "Hi there, how are you doing?",
    "Hey, my name is {name}.",
    "Hi, I am {name}.",
    "Good evening, nice to meet you.",
    "Can you recommend a good {food} place?",
    "What is the best way to learn {subject}?",
    "The book was {adj}, I finished it in one day.",
    "Our team won the match {when}, what a game!",
    "The new update made my {product} so much faster.",
    "I {liked} the service {where}, the waiter was {adj}.",
    "The price of the {product} is too high for what you get.",
    "Spent the afternoon gardening with my {relative}.",
    "The train {where} was late again, so annoying.",
    "Thank you for the quick reply and the {adj} support.",
    "Finally finished my {subject} exam, so relieved.",
    "The weather {where} is lovely {when}.",
    "Does anyone know a good dentist {where}?",
    "I love how this {product} looks in my living room.",
};

const Bank kProducts{"phone",  "laptop",     "blender", "headphones", "camera", "vacuum cleaner",
                     "watch",  "coffee machine", "jacket", "backpack", "printer", "tablet"};
const Bank kAdjectives{"great", "terrible", "amazing", "disappointing", "excellent", "okay",
                       "friendly", "awful", "fantastic", "average", "perfect", "slow"};
const Bank kFoods{"pizza", "sushi", "pasta", "burgers", "pancakes", "soup", "curry", "salad"};
const Bank kRelatives{"mother", "father", "sister", "brother", "grandmother", "uncle", "friend"};
const Bank kNames{"John", "Maria", "Tom", "Sara", "Peter", "Anna", "David", "Lisa"};
const Bank kSubjects{"guitar", "Spanish", "programming", "cooking", "statistics", "painting"};
const Bank kLiked{"liked", "loved", "enjoyed", "hated", "disliked"};
const Bank kWhen{"yesterday", "last week", "today", "last night", "this morning", "on Monday"};
const Bank kWhere{"in town", "at the mall", "downtown", "in Maastricht", "near the station",
                  "in Amsterdam", "at the airport", "in the city centre"};

std::string_view pick(Rng& rng, const Bank& bank) {
  return bank[static_cast<std::size_t>(rng.below(bank.size()))];
}

std::string fill(std::string_view tmpl, Rng& rng) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size();) {
    if (tmpl[i] != '{') {
      out += tmpl[i++];
      continue;
    }
    const auto close = tmpl.find('}', i);
    const auto key = tmpl.substr(i + 1, close - i - 1);
    i = close + 1;
    if (key == "p") out += pick(rng, kPerpetrators);
    else if (key == "product") out += pick(rng, kProducts);
    else if (key == "adj") out += pick(rng, kAdjectives);
    else if (key == "food") out += pick(rng, kFoods);
    else if (key == "relative") out += pick(rng, kRelatives);
    else if (key == "name") out += pick(rng, kNames);
    else if (key == "subject") out += pick(rng, kSubjects);
    else if (key == "liked") out += pick(rng, kLiked);
    else if (key == "when") out += pick(rng, kWhen);
    else if (key == "where") out += pick(rng, kWhere);
  }
  return out;
}

std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

std::string make_report(Rng& rng, TypeSet types) {
  std::vector<std::string> clauses;
  for (auto t : {HarassmentType::verbal, HarassmentType::non_verbal, HarassmentType::physical}) {
    if (!types.contains(t)) continue;
    const Bank& bank = t == HarassmentType::verbal       ? kVerbal
                       : t == HarassmentType::non_verbal ? kNonVerbal
                                                         : kPhysical;
    clauses.push_back(fill(pick(rng, bank), rng));
  }
  rng.shuffle(clauses);

  std::string body;
  for (std::size_t i = 0; i < clauses.size(); ++i) {
    if (i > 0) body += rng.uniform() < 0.5 ? " and then " : ". Later ";
    body += clauses[i];
  }
  if (rng.uniform() < 0.6) body += std::string(" ") + std::string(pick(rng, kPlaces));
  if (rng.uniform() < 0.5) body += std::string(" ") + std::string(pick(rng, kTimes));
  body += '.';

  const auto opener = pick(rng, kOpeners);
  std::string out;
  if (opener.empty()) {
    out = capitalize(body);
  } else if (opener.back() == '.') {
    out = std::string(opener) + ' ' + capitalize(body);
  } else {
    out = std::string(opener) + ' ' + body;
  }
  const auto closer = pick(rng, kClosers);
  if (!closer.empty()) out += ' ' + std::string(closer);
  // Chat users often lead with small talk before the incident; the label follows the report.
  if (rng.uniform() < 0.4) out = fill(pick(rng, kNegTemplates), rng) + ' ' + out;
  return out;
}

}  // namespace

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n_docs < 2) throw Error(Errc::invalid_config, "synthetic: n_docs must be >= 2");
  if (!(spec.label_noise >= 0.0 && spec.label_noise < 0.5)) {
    throw Error(Errc::invalid_config, "synthetic: label_noise must be in [0, 0.5)");
  }
  Rng rng(spec.seed);
  SyntheticCorpus out;
  const std::size_t n_reports = spec.n_docs / 2;
  const std::size_t n_negatives = spec.n_docs - n_reports;

  for (std::size_t i = 0; i < n_reports; ++i) {
    TypeSet types;
    while (types.empty()) {
      if (rng.uniform() < 0.5) types.insert(HarassmentType::verbal);
      if (rng.uniform() < 0.5) types.insert(HarassmentType::non_verbal);
      if (rng.uniform() < 0.45) types.insert(HarassmentType::physical);
    }
    LabeledReport r;
    r.text = make_report(rng, types);
    r.is_harassment = true;
    r.labels = types;
    for (auto t : {HarassmentType::verbal, HarassmentType::non_verbal, HarassmentType::physical}) {
      if (rng.uniform() < spec.label_noise) {
        if (r.labels.contains(t)) r.labels.erase(t);
        else r.labels.insert(t);
      }
    }
    out.reports.push_back(std::move(r));
  }
  for (std::size_t i = 0; i < n_negatives; ++i) {
    out.negatives.push_back(fill(pick(rng, kNegTemplates), rng));
  }
  return out;
}

}  // namespace safechat::classify
