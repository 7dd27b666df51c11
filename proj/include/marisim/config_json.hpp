#pragma once

// JSON mappings for the sensor configuration types. Every reader accepts a
// partial object: absent keys keep the type's defaults. Readers validate the
// result and throw ConfigError naming the offending field.

#include "marisim/camera.hpp"
#include "marisim/nav.hpp"
#include "marisim/sonar.hpp"

#include "json.hpp"

namespace marisim {

Pose poseFromJson(const nlohmann::json& j);
nlohmann::json poseToJson(const Pose& pose);

CameraIntrinsics intrinsicsFromJson(const nlohmann::json& j);
nlohmann::json intrinsicsToJson(const CameraIntrinsics& k);

LightConfig lightingFromJson(const nlohmann::json& j);
nlohmann::json lightingToJson(const LightConfig& l);

WaterColumnParams waterParamsFromJson(const nlohmann::json& j);
nlohmann::json waterParamsToJson(const WaterColumnParams& p);

SonarConfig sonarConfigFromJson(const nlohmann::json& j, SonarConfig base = {});
nlohmann::json sonarConfigToJson(const SonarConfig& c);

DvlConfig dvlConfigFromJson(const nlohmann::json& j);
nlohmann::json dvlConfigToJson(const DvlConfig& c);

BarometerConfig barometerConfigFromJson(const nlohmann::json& j);
nlohmann::json barometerConfigToJson(const BarometerConfig& c);

} // namespace marisim
