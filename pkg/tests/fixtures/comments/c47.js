var a = 1, b = 2, c = 3, x = 1, img = ee.Image(0), s = 'z';
var m = s.replace(/\/\//g, '/'); // escaped slashes
// standalone comment 36

var t = `line // kept ${ee.Number(1).add(2) /* inner */} /* kept */`;
var s3 = 'it\'s // fine'; // escaped quote
// standalone comment 24

Map.addLayer(img, {min: 0, max: 1 /* vis */}, 'NDVI // name');
// standalone comment 39

