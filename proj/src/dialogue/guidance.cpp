#include <algorithm>

#include <nlohmann/json.hpp>

#include "safechat/dialogue.hpp"
#include "safechat/error.hpp"
#include "safechat/io.hpp"

namespace safechat::dialogue {

namespace {

Resource resource_from(const nlohmann::json& j) {
  Resource r;
  r.id = j.at("id").get<std::string>();
  r.name = j.at("name").get<std::string>();
  r.description = j.value("description", "");
  r.contact = j.at("contact").get<std::string>();
  r.medical_only = j.value("medical_only", false);
  if (r.id.empty() || r.name.empty() || r.contact.empty()) {
    throw Error(Errc::bad_format, "guidance: resource needs id, name and contact");
  }
  return r;
}

}  // namespace

GuidanceDirectory::GuidanceDirectory(std::array<std::vector<Resource>, 3> by_type, Resource police)
    : by_type_(std::move(by_type)), police_(std::move(police)) {
  for (auto t : {HarassmentType::verbal, HarassmentType::non_verbal, HarassmentType::physical}) {
    const auto& list = resources(t);
    const bool any_general = std::any_of(list.begin(), list.end(),
                                         [](const Resource& r) { return !r.medical_only; });
    if (!any_general) {
      throw Error(Errc::bad_format, "guidance: no resource for " + std::string(classify::type_name(t)));
    }
  }
  if (police_.contact.empty()) throw Error(Errc::bad_format, "guidance: police contact missing");
}

GuidanceDirectory GuidanceDirectory::parse(std::string_view json_text, std::string_view origin) {
  try {
    const auto j = nlohmann::json::parse(json_text);
    std::array<std::vector<Resource>, 3> by_type;
    const auto& intents = j.at("intents");
    for (auto t : {HarassmentType::verbal, HarassmentType::non_verbal, HarassmentType::physical}) {
      const auto key = std::string(classify::type_name(t));
      if (!intents.contains(key)) {
        throw Error(Errc::bad_format, std::string(origin) + ": no entry for intent " + key);
      }
      for (const auto& r : intents.at(key)) by_type[static_cast<std::size_t>(t)].push_back(resource_from(r));
    }
    return GuidanceDirectory(std::move(by_type), resource_from(j.at("police")));
  } catch (const nlohmann::json::exception& ex) {
    throw Error(Errc::bad_format, std::string(origin) + ": " + ex.what());
  }
}

GuidanceDirectory GuidanceDirectory::load(const std::filesystem::path& path) {
  return parse(io::read_file(path), path.string());
}

std::vector<Resource> resources_for(TypeSet intents, const GuidanceDirectory& dir, bool medical) {
  std::vector<Resource> out;
  auto add = [&](const Resource& r) {
    const bool seen = std::any_of(out.begin(), out.end(), [&](const Resource& o) { return o.id == r.id; });
    if (!seen) out.push_back(r);
  };
  const auto order = intents.ordered();
  if (medical) {
    for (auto t : order) {
      for (const auto& r : dir.resources(t)) {
        if (r.medical_only) add(r);
      }
    }
  }
  for (auto t : order) {
    for (const auto& r : dir.resources(t)) {
      if (!r.medical_only) add(r);
    }
  }
  return out;
}

std::vector<BotReply> guidance_for(TypeSet intents, const GuidanceDirectory& dir,
                                   const Phrases& phrases) {
  if (intents.empty()) throw Error(Errc::empty_intents, "guidance_for: no intents");
  std::vector<BotReply> out;
  if (intents.contains(HarassmentType::physical)) {
    out.push_back({phrases.render("medical_query"), ReplyKind::question});
  }
  for (const auto& r : resources_for(intents, dir, false)) {
    out.push_back({phrases.render("resource", {{"name", r.name},
                                               {"description", r.description},
                                               {"contact", r.contact}}),
                   ReplyKind::guidance});
  }
  return out;
}

}  // namespace safechat::dialogue
