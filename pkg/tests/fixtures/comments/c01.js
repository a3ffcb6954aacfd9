var a = 1, b = 2, c = 3, x = 1, img = ee.Image(0), s = 'z';
var s3 = 'it\'s // fine'; // escaped quote
var o = {a: 1, /* key */ b: 'x//y'}; // object
var n = ee.Number(4) // comment between
  .sqrt();

var s = "/* not a comment */"; /* real one */
var t = `line // kept ${ee.Number(1).add(2) /* inner */} /* kept */`;
// standalone comment 6
var s3 = 'it\'s // fine'; // escaped quote
Map.addLayer(img, {min: 0, max: 1 /* vis */}, 'NDVI // name');
// standalone comment 17
var t = `line // kept ${ee.Number(1).add(2) /* inner */} /* kept */`;
var o = {a: 1, /* key */ b: 'x//y'}; // object
if (x) { /* empty */ } else { print('a/*b*/c'); }

